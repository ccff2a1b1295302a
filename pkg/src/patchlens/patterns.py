"""Detectors for the 25 repair-pattern variants over an AST diff.

Each of the nine families has its own detector working on a DiffContext
(before tree, after tree, node mapping, edit script). Detectors are pure
and independent: one patch may legitimately carry several patterns at
once. The one deliberate exclusion is between conditional-block addition
and wrapping: for a single inserted ``if`` the arbiter is whether the
guarded branches contain any node mapped from the before tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, unique

from .differ import DEFAULT_OPTIONS, Delete, DiffOptions, EditScript, Insert, MappingStore, Move, Update, edit_script, match
from .tree import (
    EXPRESSION_KINDS,
    LITERAL_KINDS,
    SIMPLE_STATEMENT_KINDS,
    STATEMENT_KINDS,
    AstNode,
    NodeKind,
    SourceSpan,
)


@unique
class PatternGroup(Enum):
    CONDITIONAL_BLOCK = "conditionalBlock"
    EXPRESSION_FIX = "expressionFix"
    WRAPS_UNWRAPS = "wrapsUnwraps"
    SINGLE_LINE = "singleLine"
    WRONG_REFERENCE = "wrongReference"
    MISSING_NULL_CHECK = "missingNullCheck"
    COPY_PASTE = "copyPaste"
    CONSTANT_CHANGE = "constantChange"
    CODE_MOVING = "codeMoving"


@unique
class PatternId(Enum):
    COND_BLOCK_ADDITION = "condBlockAddition"
    COND_BLOCK_ADD_WITH_RETURN = "condBlockAddWithReturn"
    COND_BLOCK_ADD_WITH_EXCEPTION = "condBlockAddWithException"
    COND_BLOCK_REMOVAL = "condBlockRemoval"
    EXP_LOGIC_MOD = "expLogicMod"
    EXP_LOGIC_EXPAND = "expLogicExpand"
    EXP_LOGIC_REDUCE = "expLogicReduce"
    EXP_ARITH_MOD = "expArithMod"
    WRAPS_IF = "wrapsIf"
    WRAPS_IF_ELSE = "wrapsIfElse"
    WRAPS_ELSE = "wrapsElse"
    WRAPS_TRY_CATCH = "wrapsTryCatch"
    WRAPS_METHOD = "wrapsMethod"
    WRAPS_LOOP = "wrapsLoop"
    UNWRAP_IF_ELSE = "unwrapIfElse"
    UNWRAP_TRY_CATCH = "unwrapTryCatch"
    UNWRAP_METHOD = "unwrapMethod"
    SINGLE_LINE = "singleLine"
    WRONG_VAR_REF = "wrongVarRef"
    WRONG_METHOD_REF = "wrongMethodRef"
    MISS_NULL_CHECK_POSITIVE = "missNullCheckPositive"
    MISS_NULL_CHECK_NEGATIVE = "missNullCheckNegative"
    COPY_PASTE = "copyPaste"
    CONSTANT_CHANGE = "constantChange"
    CODE_MOVING = "codeMoving"


PATTERN_GROUPS: dict[PatternId, PatternGroup] = {
    PatternId.COND_BLOCK_ADDITION: PatternGroup.CONDITIONAL_BLOCK,
    PatternId.COND_BLOCK_ADD_WITH_RETURN: PatternGroup.CONDITIONAL_BLOCK,
    PatternId.COND_BLOCK_ADD_WITH_EXCEPTION: PatternGroup.CONDITIONAL_BLOCK,
    PatternId.COND_BLOCK_REMOVAL: PatternGroup.CONDITIONAL_BLOCK,
    PatternId.EXP_LOGIC_MOD: PatternGroup.EXPRESSION_FIX,
    PatternId.EXP_LOGIC_EXPAND: PatternGroup.EXPRESSION_FIX,
    PatternId.EXP_LOGIC_REDUCE: PatternGroup.EXPRESSION_FIX,
    PatternId.EXP_ARITH_MOD: PatternGroup.EXPRESSION_FIX,
    PatternId.WRAPS_IF: PatternGroup.WRAPS_UNWRAPS,
    PatternId.WRAPS_IF_ELSE: PatternGroup.WRAPS_UNWRAPS,
    PatternId.WRAPS_ELSE: PatternGroup.WRAPS_UNWRAPS,
    PatternId.WRAPS_TRY_CATCH: PatternGroup.WRAPS_UNWRAPS,
    PatternId.WRAPS_METHOD: PatternGroup.WRAPS_UNWRAPS,
    PatternId.WRAPS_LOOP: PatternGroup.WRAPS_UNWRAPS,
    PatternId.UNWRAP_IF_ELSE: PatternGroup.WRAPS_UNWRAPS,
    PatternId.UNWRAP_TRY_CATCH: PatternGroup.WRAPS_UNWRAPS,
    PatternId.UNWRAP_METHOD: PatternGroup.WRAPS_UNWRAPS,
    PatternId.SINGLE_LINE: PatternGroup.SINGLE_LINE,
    PatternId.WRONG_VAR_REF: PatternGroup.WRONG_REFERENCE,
    PatternId.WRONG_METHOD_REF: PatternGroup.WRONG_REFERENCE,
    PatternId.MISS_NULL_CHECK_POSITIVE: PatternGroup.MISSING_NULL_CHECK,
    PatternId.MISS_NULL_CHECK_NEGATIVE: PatternGroup.MISSING_NULL_CHECK,
    PatternId.COPY_PASTE: PatternGroup.COPY_PASTE,
    PatternId.CONSTANT_CHANGE: PatternGroup.CONSTANT_CHANGE,
    PatternId.CODE_MOVING: PatternGroup.CODE_MOVING,
}

_GROUP_ORDER = {group: i for i, group in enumerate(PatternGroup)}
_ID_ORDER = {pid: i for i, pid in enumerate(PatternId)}


def group_of(pattern_id: PatternId) -> PatternGroup:
    return PATTERN_GROUPS[pattern_id]


BEFORE = "before"
AFTER = "after"


@dataclass(frozen=True, order=True)
class Anchor:
    span: SourceSpan = field(compare=False)
    side: str = field(compare=False)

    def sort_key(self) -> tuple:
        s = self.span
        return (s.file, self.side, s.start_line, s.start_col, s.end_line, s.end_col)


@dataclass(frozen=True)
class PatternInstance:
    pattern_id: PatternId
    anchors: tuple[Anchor, ...]
    note: str | None = None

    def __post_init__(self) -> None:
        if not self.anchors:
            raise ValueError("a pattern instance needs at least one anchor")

    def sort_key(self) -> tuple:
        return (_GROUP_ORDER[group_of(self.pattern_id)], _ID_ORDER[self.pattern_id], self.anchors[0].sort_key())

    def dedup_key(self) -> tuple:
        return (self.pattern_id, frozenset(a.sort_key() for a in self.anchors))


@dataclass(frozen=True)
class DetectorOptions:
    min_clone_size: int = 4

    def __post_init__(self) -> None:
        if self.min_clone_size < 1:
            raise ValueError("min_clone_size must be >= 1")


DEFAULT_DETECTOR_OPTIONS = DetectorOptions()


class DiffContext:
    """One file pair's diff plus the indexes the detectors need."""

    def __init__(self, before_tree: AstNode, after_tree: AstNode, mapping: MappingStore, script: EditScript):
        self.before_tree = before_tree
        self.after_tree = after_tree
        self.mapping = mapping
        self.script = script
        self.inserted: dict[int, AstNode] = {}
        self.deleted: dict[int, AstNode] = {}
        self.updated: dict[int, Update] = {}
        self.moved: dict[int, Move] = {}
        for action in script:
            if isinstance(action, Insert):
                self.inserted[action.node.id] = action.node
            elif isinstance(action, Delete):
                self.deleted[action.node.id] = action.node
            elif isinstance(action, Update):
                self.updated[action.node.id] = action
            elif isinstance(action, Move):
                self.moved[action.node.id] = action

    @classmethod
    def build(cls, before_tree: AstNode, after_tree: AstNode, options: DiffOptions = DEFAULT_OPTIONS) -> "DiffContext":
        mapping = match(before_tree, after_tree, options)
        script = edit_script(before_tree, after_tree, mapping)
        return cls(before_tree, after_tree, mapping, script)

    # -- node predicates ------------------------------------------------

    def is_inserted(self, node: AstNode) -> bool:
        return node.id in self.inserted

    def is_deleted(self, node: AstNode) -> bool:
        return node.id in self.deleted

    def mapped_from_before(self, node: AstNode) -> bool:
        """True when an after-tree node existed before the patch."""
        return self.mapping.src_for(node) is not None

    def survives(self, node: AstNode) -> bool:
        """True when a before-tree node still exists after the patch."""
        return self.mapping.dst_for(node) is not None

    def inserted_roots(self) -> list[AstNode]:
        return [n for n in self.after_tree.walk() if self.is_inserted(n) and (n.parent is None or not self.is_inserted(n.parent))]

    def deleted_roots(self) -> list[AstNode]:
        return [n for n in self.before_tree.walk() if self.is_deleted(n) and (n.parent is None or not self.is_deleted(n.parent))]

    def has_inserted_ancestor(self, node: AstNode) -> bool:
        anc = node.parent
        while anc is not None:
            if self.is_inserted(anc):
                return True
            anc = anc.parent
        return False


# -- shared helpers --------------------------------------------------------


def _anchor(node: AstNode, side: str) -> Anchor:
    return Anchor(span=node.span, side=side)


def _code_nodes(region: AstNode):
    """Statement- and expression-kind nodes of a region, region root included."""
    for node in region.walk():
        if node.kind in STATEMENT_KINDS or node.kind in EXPRESSION_KINDS:
            yield node


def _region_holds_existing_code(ctx: DiffContext, region: AstNode) -> bool:
    """Arbiter between block addition and wrapping: any mapped code node?"""
    return any(ctx.mapped_from_before(n) for n in _code_nodes(region))


def _region_code_survives(ctx: DiffContext, region: AstNode) -> bool:
    return any(ctx.survives(n) for n in _code_nodes(region))


def _if_branch_regions(if_node: AstNode) -> list[AstNode]:
    # If children: [condition, then] or [condition, then, Else]
    return list(if_node.children[1:])


def _guarded_regions(conditional: AstNode) -> list[AstNode]:
    kind = conditional.kind
    if kind is NodeKind.IF:
        return _if_branch_regions(conditional)
    if kind is NodeKind.TERNARY:
        return list(conditional.children[1:3])
    if kind is NodeKind.WHILE_LOOP:
        return [conditional.children[1]]
    if kind is NodeKind.FOR_LOOP:
        return [conditional.children[3]]
    return []


def _condition_slot(parent: AstNode) -> AstNode | None:
    kind = parent.kind
    if kind in (NodeKind.IF, NodeKind.TERNARY, NodeKind.WHILE_LOOP):
        return parent.children[0]
    if kind is NodeKind.FOR_LOOP:
        return parent.children[1]
    return None


def _enclosing_conditional(node: AstNode) -> AstNode | None:
    """Nearest ancestor conditional whose condition subtree holds ``node``."""
    child = node
    parent = node.parent
    while parent is not None:
        if _condition_slot(parent) is child:
            return parent
        child = parent
        parent = parent.parent
    return None


def _trailing_statements(region: AstNode) -> list[AstNode]:
    """Last statement of each straight-line branch under a guarded region."""
    if region.kind is NodeKind.BLOCK:
        return [c for c in region.children[-1:]]
    if region.kind is NodeKind.ELSE:
        return _trailing_statements(region.children[0])
    if region.kind is NodeKind.IF:
        out = []
        for branch in _if_branch_regions(region):
            out.extend(_trailing_statements(branch))
        return out
    return [region]


# -- scope lookup (minimal lexical resolution) ------------------------------


def find_declaration(node: AstNode, name: str) -> AstNode | None:
    """Walk the lexical scope chain for a declaration of ``name``.

    Covers preceding local declarations in enclosing blocks, for-loop
    headers, method/catch parameters and class fields. No inheritance, no
    imports: names outside the file stay unresolved on purpose.
    """
    child = node
    scope = node.parent
    while scope is not None:
        if scope.kind is NodeKind.BLOCK:
            for sibling in scope.children:
                if sibling is child:
                    break
                if sibling.kind is NodeKind.VAR_DECL and sibling.label == name:
                    return sibling
        elif scope.kind is NodeKind.FOR_LOOP:
            init = scope.children[0]
            if init is not child and init.kind is NodeKind.VAR_DECL and init.label == name:
                return init
        elif scope.kind is NodeKind.METHOD_DECL:
            for param in scope.children:
                if param.kind is NodeKind.PARAMETER and param.label == name:
                    return param
        elif scope.kind is NodeKind.CATCH_CLAUSE:
            param = scope.children[0]
            if param.kind is NodeKind.PARAMETER and param.label == name:
                return param
        elif scope.kind is NodeKind.CLASS_DECL:
            for member in scope.children:
                if member.kind is NodeKind.FIELD_DECL and member.label == name:
                    return member
        child = scope
        scope = scope.parent
    return None


def _is_constant_declaration(decl: AstNode) -> bool:
    """Field with a `final` modifier, or an all-caps name and no modifiers."""
    if decl.kind is not NodeKind.FIELD_DECL:
        return False
    modifiers = [c for c in decl.children if c.kind is NodeKind.MODIFIER]
    if any(m.label == "final" for m in modifiers):
        return True
    if modifiers:
        return False
    name = decl.label
    return bool(name) and name == name.upper() and any(ch.isalpha() for ch in name)


# -- family detectors -------------------------------------------------------


def detect_missing_null_check(ctx: DiffContext) -> list[PatternInstance]:
    """Inserted null comparisons guarding code, minus patch-local variables.

    Strategy: find each inserted ``==``/``!=`` with a null operand, extract
    the checked variable (direct read, field access, or the receiver of a
    checked call; either operand order), then keep the check unless the
    variable is itself introduced by the patch and the guard wraps no
    pre-existing code.
    """
    out: list[PatternInstance] = []
    for node in ctx.after_tree.walk():
        if node.kind is not NodeKind.BINARY_OP or node.label not in ("==", "!="):
            continue
        if not ctx.is_inserted(node):
            continue
        left, right = node.children
        if left.kind is NodeKind.LITERAL_NULL:
            operand = right
        elif right.kind is NodeKind.LITERAL_NULL:
            operand = left
        else:
            continue
        variable = _checked_variable(operand)
        if variable is None:
            continue
        if _variable_is_new(ctx, node, variable):
            conditional = _enclosing_conditional(node)
            if conditional is None:
                continue
            if not any(_region_holds_existing_code(ctx, region) for region in _guarded_regions(conditional)):
                continue
        pattern = PatternId.MISS_NULL_CHECK_POSITIVE if node.label == "==" else PatternId.MISS_NULL_CHECK_NEGATIVE
        out.append(PatternInstance(pattern, (_anchor(node, AFTER),), note=variable))
    return out


def _checked_variable(operand: AstNode) -> str | None:
    node = operand
    while node.kind is NodeKind.METHOD_CALL:
        node = node.children[0]  # receiver of the checked call chain
    if node.kind in (NodeKind.VARIABLE_READ, NodeKind.FIELD_ACCESS) and node.label != "this":
        return node.label
    return None


def _variable_is_new(ctx: DiffContext, check_node: AstNode, name: str) -> bool:
    decl = find_declaration(check_node, name)
    if decl is None:
        return False  # unresolved names (fields of other files etc.) count as pre-existing
    return not ctx.mapped_from_before(decl)


def detect_conditional_block(ctx: DiffContext) -> list[PatternInstance]:
    """Whole conditional blocks added or removed, body entirely new/gone."""
    out: list[PatternInstance] = []
    for node in ctx.after_tree.walk():
        if node.kind is not NodeKind.IF or not ctx.is_inserted(node):
            continue
        regions = _if_branch_regions(node)
        if any(_region_holds_existing_code(ctx, region) for region in regions):
            continue  # wrapping, not addition
        trailing = [s.kind for region in regions for s in _trailing_statements(region)]
        anchors = (_anchor(node, AFTER),)
        if NodeKind.RETURN in trailing:
            out.append(PatternInstance(PatternId.COND_BLOCK_ADD_WITH_RETURN, anchors))
        if NodeKind.THROW in trailing:
            out.append(PatternInstance(PatternId.COND_BLOCK_ADD_WITH_EXCEPTION, anchors))
        if NodeKind.RETURN not in trailing and NodeKind.THROW not in trailing:
            out.append(PatternInstance(PatternId.COND_BLOCK_ADDITION, anchors))
    for node in ctx.before_tree.walk():
        if node.kind is not NodeKind.IF or not ctx.is_deleted(node):
            continue
        regions = _if_branch_regions(node)
        if any(_region_code_survives(ctx, region) for region in regions):
            continue  # unwrapping, not removal
        out.append(PatternInstance(PatternId.COND_BLOCK_REMOVAL, (_anchor(node, BEFORE),)))
    return out


def detect_wraps_unwraps(ctx: DiffContext) -> list[PatternInstance]:
    """New structure enclosing surviving code, or removed structure releasing it."""
    out: list[PatternInstance] = []
    for node in ctx.after_tree.walk():
        if not ctx.is_inserted(node):
            continue
        kind = node.kind
        anchors = (_anchor(node, AFTER),)
        if kind is NodeKind.IF:
            regions = _if_branch_regions(node)
            if not any(_region_holds_existing_code(ctx, r) for r in regions):
                continue
            has_else = len(node.children) == 3
            out.append(PatternInstance(PatternId.WRAPS_IF_ELSE if has_else else PatternId.WRAPS_IF, anchors))
        elif kind is NodeKind.TERNARY:
            if any(_region_holds_existing_code(ctx, r) for r in _guarded_regions(node)):
                out.append(PatternInstance(PatternId.WRAPS_IF_ELSE, anchors))
        elif kind is NodeKind.ELSE:
            parent = node.parent
            if parent is not None and ctx.mapped_from_before(parent) and _region_holds_existing_code(ctx, node):
                out.append(PatternInstance(PatternId.WRAPS_ELSE, anchors))
        elif kind is NodeKind.TRY_BLOCK:
            if _region_holds_existing_code(ctx, node.children[0]):
                out.append(PatternInstance(PatternId.WRAPS_TRY_CATCH, anchors))
        elif kind is NodeKind.METHOD_CALL:
            if any(ctx.mapped_from_before(child) for child in node.children):
                out.append(PatternInstance(PatternId.WRAPS_METHOD, anchors, note=node.label))
        elif kind in (NodeKind.WHILE_LOOP, NodeKind.FOR_LOOP):
            body = node.children[1] if kind is NodeKind.WHILE_LOOP else node.children[3]
            if _region_holds_existing_code(ctx, body):
                out.append(PatternInstance(PatternId.WRAPS_LOOP, anchors))
    for node in ctx.before_tree.walk():
        if not ctx.is_deleted(node):
            continue
        kind = node.kind
        anchors = (_anchor(node, BEFORE),)
        if kind is NodeKind.IF:
            if any(_region_code_survives(ctx, r) for r in _if_branch_regions(node)):
                out.append(PatternInstance(PatternId.UNWRAP_IF_ELSE, anchors))
        elif kind is NodeKind.TERNARY:
            if any(_region_code_survives(ctx, r) for r in _guarded_regions(node)):
                out.append(PatternInstance(PatternId.UNWRAP_IF_ELSE, anchors))
        elif kind is NodeKind.TRY_BLOCK:
            if _region_code_survives(ctx, node.children[0]):
                out.append(PatternInstance(PatternId.UNWRAP_TRY_CATCH, anchors))
        elif kind is NodeKind.METHOD_CALL:
            if any(ctx.survives(child) for child in node.children):
                out.append(PatternInstance(PatternId.UNWRAP_METHOD, anchors, note=node.label))
    return out


def detect_single_line(ctx: DiffContext) -> list[PatternInstance]:
    """Patches confined to one line, or to one simple statement."""
    if not ctx.script:
        return []
    before_lines: set[int] = set()
    after_lines: set[int] = set()
    before_nodes: list[AstNode] = []
    after_nodes: list[AstNode] = []
    for action in ctx.script:
        if isinstance(action, Insert):
            after_lines.update(action.node.span.lines())
            after_nodes.append(action.node)
        elif isinstance(action, Delete):
            before_lines.update(action.node.span.lines())
            before_nodes.append(action.node)
        elif isinstance(action, Update):
            before_lines.update(action.node.span.lines())
            after_lines.update(action.after_node.span.lines())
            before_nodes.append(action.node)
            after_nodes.append(action.after_node)
        elif isinstance(action, Move):
            before_lines.update(action.node.span.lines())
            after_lines.update(action.after_node.span.lines())
            before_nodes.append(action.node)
            after_nodes.append(action.after_node)

    one_line = len(before_lines) == 1 and len(after_lines) <= 1

    def enclosing_simple(node: AstNode) -> AstNode | None:
        cur: AstNode | None = node
        while cur is not None:
            if cur.kind in SIMPLE_STATEMENT_KINDS:
                return cur
            cur = cur.parent
        return None

    def common_simple(nodes: list[AstNode]) -> AstNode | None:
        stmts = {id(s): s for n in nodes if (s := enclosing_simple(n)) is not None}
        if len(stmts) == 1 and all(enclosing_simple(n) is not None for n in nodes):
            return next(iter(stmts.values()))
        return None

    one_statement = False
    stmt_before = common_simple(before_nodes) if before_nodes else None
    stmt_after = common_simple(after_nodes) if after_nodes else None
    if before_nodes and after_nodes:
        one_statement = stmt_before is not None and stmt_after is not None and ctx.mapping.dst_for(stmt_before) is stmt_after
    elif before_nodes:
        one_statement = stmt_before is not None
    elif after_nodes:
        one_statement = stmt_after is not None

    if not (one_line or one_statement):
        return []
    anchors: list[Anchor] = []
    if before_nodes:
        anchors.append(_anchor(stmt_before or before_nodes[0], BEFORE))
    if after_nodes:
        anchors.append(_anchor(stmt_after or after_nodes[0], AFTER))
    return [PatternInstance(PatternId.SINGLE_LINE, tuple(anchors))]


def detect_wrong_reference(ctx: DiffContext) -> list[PatternInstance]:
    """Label updates swapping one resolved reference for another."""
    out: list[PatternInstance] = []
    for update in ctx.updated.values():
        node = update.node
        partner = update.after_node
        if node.kind in (NodeKind.VARIABLE_READ, NodeKind.FIELD_ACCESS):
            if node.label == "this" or update.new_label == "this":
                continue
            old_decl = find_declaration(node, node.label)
            new_decl = find_declaration(partner, update.new_label)
            if old_decl is not None and new_decl is not None:
                out.append(
                    PatternInstance(
                        PatternId.WRONG_VAR_REF,
                        (_anchor(node, BEFORE), _anchor(partner, AFTER)),
                        note=f"{node.label} -> {update.new_label}",
                    )
                )
        elif node.kind is NodeKind.METHOD_CALL:
            if not _same_receiver_shape(ctx, node, partner):
                continue
            receiver = partner.children[0]
            declared = _method_declared(ctx.after_tree, update.new_label)
            external_receiver = not (receiver.kind is NodeKind.VARIABLE_READ and receiver.label == "this")
            if declared or external_receiver:
                out.append(
                    PatternInstance(
                        PatternId.WRONG_METHOD_REF,
                        (_anchor(node, BEFORE), _anchor(partner, AFTER)),
                        note=f"{node.label} -> {update.new_label}",
                    )
                )
    return out


def _same_receiver_shape(ctx: DiffContext, before_call: AstNode, after_call: AstNode) -> bool:
    r1 = before_call.children[0]
    r2 = after_call.children[0]
    if ctx.mapping.dst_for(r1) is r2:
        return True
    return r1.kind is r2.kind and r1.label == r2.label


def _method_declared(tree: AstNode, name: str) -> bool:
    return any(n.kind is NodeKind.METHOD_DECL and n.label == name for n in tree.walk())


_LOGICAL_OPS = frozenset({"&&", "||"})
_RELATIONAL_OPS = frozenset({"==", "!=", "<", "<=", ">", ">="})
_BOOLEAN_OPS = _LOGICAL_OPS | _RELATIONAL_OPS
_ARITH_BIN_OPS = frozenset({"+", "-", "*", "/", "%"})
_ARITH_ASSIGN_OPS = frozenset({"+=", "-=", "*=", "/="})


def detect_expression_fix(ctx: DiffContext) -> list[PatternInstance]:
    """Logic expression modification/expansion/reduction and arithmetic fixes."""
    out: list[PatternInstance] = []

    for update in ctx.updated.values():
        node = update.node
        old, new = node.label, update.new_label
        anchors = (_anchor(node, BEFORE), _anchor(update.after_node, AFTER))
        if node.kind is NodeKind.BINARY_OP:
            if old in _BOOLEAN_OPS and new in _BOOLEAN_OPS:
                out.append(PatternInstance(PatternId.EXP_LOGIC_MOD, anchors, note=f"{old} -> {new}"))
            elif old in _ARITH_BIN_OPS or new in _ARITH_BIN_OPS:
                out.append(PatternInstance(PatternId.EXP_ARITH_MOD, anchors, note=f"{old} -> {new}"))
        elif node.kind is NodeKind.ASSIGNMENT:
            if old in _ARITH_ASSIGN_OPS or new in _ARITH_ASSIGN_OPS:
                out.append(PatternInstance(PatternId.EXP_ARITH_MOD, anchors, note=f"{old} -> {new}"))

    expanding: set[int] = set()
    for node in ctx.after_tree.walk():
        if node.kind is NodeKind.BINARY_OP and node.label in _LOGICAL_OPS and ctx.is_inserted(node):
            if any(ctx.mapped_from_before(child) for child in node.children):
                expanding.add(node.id)
                out.append(PatternInstance(PatternId.EXP_LOGIC_EXPAND, (_anchor(node, AFTER),), note=node.label))

    reducing: set[int] = set()
    for node in ctx.before_tree.walk():
        if node.kind is NodeKind.BINARY_OP and node.label in _LOGICAL_OPS and ctx.is_deleted(node):
            if any(ctx.survives(child) for child in node.children):
                reducing.add(node.id)
                out.append(PatternInstance(PatternId.EXP_LOGIC_REDUCE, (_anchor(node, BEFORE),), note=node.label))

    # Operand replaced in place: a deleted child plus an inserted child under
    # the same mapped operator node, not already counted as expand/reduce.
    for node in ctx.before_tree.walk():
        if node.kind not in (NodeKind.BINARY_OP, NodeKind.ASSIGNMENT):
            continue
        partner = ctx.mapping.dst_for(node)
        if partner is None:
            continue
        op = node.label
        deleted_children = [c for c in node.children if ctx.is_deleted(c) and c.id not in reducing]
        inserted_children = [c for c in partner.children if ctx.is_inserted(c) and c.id not in expanding]
        if not deleted_children or not inserted_children:
            continue
        anchors = (_anchor(node, BEFORE), _anchor(partner, AFTER))
        if node.kind is NodeKind.BINARY_OP and op in _BOOLEAN_OPS and partner.label in _BOOLEAN_OPS:
            out.append(PatternInstance(PatternId.EXP_LOGIC_MOD, anchors, note=f"operand under {op}"))
        elif op in _ARITH_BIN_OPS or op in _ARITH_ASSIGN_OPS:
            out.append(PatternInstance(PatternId.EXP_ARITH_MOD, anchors, note=f"operand under {op}"))
    return out


_CLONE_WILDCARD_KINDS = frozenset(
    {
        NodeKind.VARIABLE_READ,
        NodeKind.FIELD_ACCESS,
        NodeKind.VAR_DECL,
        NodeKind.PARAMETER,
    }
)


def _rename_insensitive_digest(node: AstNode) -> tuple:
    label = "*" if node.kind in _CLONE_WILDCARD_KINDS else node.label
    return (node.kind, label, tuple(_rename_insensitive_digest(c) for c in node.children))


def detect_copy_paste(ctx: DiffContext, options: DetectorOptions = DEFAULT_DETECTOR_OPTIONS) -> list[PatternInstance]:
    return detect_copy_paste_multi([ctx], options)


def detect_copy_paste_multi(contexts: list[DiffContext], options: DetectorOptions = DEFAULT_DETECTOR_OPTIONS) -> list[PatternInstance]:
    """The same change applied at two or more distinct sites.

    Inserted subtrees are compared isomorphically with identifier labels
    wildcarded and must each reach ``min_clone_size`` nodes; label updates
    group by (kind, old label, new label). Sites may span files, so this
    detector accepts every per-file context of a patch at once.
    """
    out: list[PatternInstance] = []
    insert_groups: dict[tuple, list[AstNode]] = {}
    for ctx in contexts:
        for root in ctx.inserted_roots():
            if root.size < options.min_clone_size:
                continue
            insert_groups.setdefault(_rename_insensitive_digest(root), []).append(root)
    for roots in insert_groups.values():
        if len(roots) >= 2:
            anchors = tuple(_anchor(r, AFTER) for r in roots)
            out.append(PatternInstance(PatternId.COPY_PASTE, anchors, note=f"{len(roots)} insertion sites"))

    update_groups: dict[tuple, list[Update]] = {}
    for ctx in contexts:
        for update in ctx.updated.values():
            key = (update.node.kind, update.node.label, update.new_label)
            update_groups.setdefault(key, []).append(update)
    for key, updates in update_groups.items():
        if len(updates) >= 2:
            anchors = tuple(_anchor(u.after_node, AFTER) for u in updates)
            out.append(PatternInstance(PatternId.COPY_PASTE, anchors, note=f'{len(updates)} updates "{key[1]}" -> "{key[2]}"'))
    return out


def detect_constant_change(ctx: DiffContext) -> list[PatternInstance]:
    """Literal label updates and changed references to constant fields."""
    out: list[PatternInstance] = []
    for update in ctx.updated.values():
        node = update.node
        anchors = (_anchor(node, BEFORE), _anchor(update.after_node, AFTER))
        if node.kind in LITERAL_KINDS:
            out.append(PatternInstance(PatternId.CONSTANT_CHANGE, anchors, note=f"{node.label} -> {update.new_label}"))
        elif node.kind is NodeKind.VARIABLE_READ:
            old_decl = find_declaration(node, node.label)
            new_decl = find_declaration(update.after_node, update.new_label)
            if (old_decl is not None and _is_constant_declaration(old_decl)) or (
                new_decl is not None and _is_constant_declaration(new_decl)
            ):
                out.append(PatternInstance(PatternId.CONSTANT_CHANGE, anchors, note=f"{node.label} -> {update.new_label}"))
    # A constant read replaced outright (deleted read, sibling insertion).
    for node in ctx.before_tree.walk():
        if node.kind is not NodeKind.VARIABLE_READ or not ctx.is_deleted(node):
            continue
        decl = find_declaration(node, node.label)
        if decl is None or not _is_constant_declaration(decl):
            continue
        parent = node.parent
        if parent is None:
            continue
        partner = ctx.mapping.dst_for(parent)
        if partner is not None and any(ctx.is_inserted(c) for c in partner.children):
            out.append(PatternInstance(PatternId.CONSTANT_CHANGE, (_anchor(node, BEFORE),), note=node.label))
    return out


def detect_code_moving(ctx: DiffContext) -> list[PatternInstance]:
    """Statements relocated untouched, excluding moves that realize a (un)wrap."""
    out: list[PatternInstance] = []
    for move in ctx.moved.values():
        node = move.node
        if node.kind not in STATEMENT_KINDS:
            continue
        if any(d.id in ctx.deleted or d.id in ctx.updated for d in node.walk()):
            continue
        partner = move.after_node
        if any(ctx.is_inserted(d) for d in partner.walk()):
            continue
        if ctx.has_inserted_ancestor(partner):
            continue  # the move only realizes a wrap
        if _has_deleted_ancestor(ctx, node):
            continue  # the move only realizes an unwrap
        out.append(PatternInstance(PatternId.CODE_MOVING, (_anchor(node, BEFORE), _anchor(partner, AFTER))))
    return out


def _has_deleted_ancestor(ctx: DiffContext, node: AstNode) -> bool:
    anc = node.parent
    while anc is not None:
        if ctx.is_deleted(anc):
            return True
        anc = anc.parent
    return False


_FAMILY_DETECTORS = (
    detect_conditional_block,
    detect_expression_fix,
    detect_wraps_unwraps,
    detect_single_line,
    detect_wrong_reference,
    detect_missing_null_check,
    detect_constant_change,
    detect_code_moving,
)


def finalize_instances(instances: list[PatternInstance]) -> list[PatternInstance]:
    """Deduplicate by (id, anchor set) and order by (group, id, first anchor)."""
    seen: set[tuple] = set()
    unique: list[PatternInstance] = []
    for inst in instances:
        key = inst.dedup_key()
        if key not in seen:
            seen.add(key)
            unique.append(inst)
    unique.sort(key=lambda inst: inst.sort_key())
    return unique


def detect_all(ctx: DiffContext, options: DetectorOptions = DEFAULT_DETECTOR_OPTIONS) -> list[PatternInstance]:
    """Union of all nine family detectors on a single file pair."""
    if not ctx.script:
        return []
    instances: list[PatternInstance] = []
    for detector in _FAMILY_DETECTORS:
        instances.extend(detector(ctx))
    instances.extend(detect_copy_paste(ctx, options))
    return finalize_instances(instances)
