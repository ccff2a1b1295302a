"""Typed, immutable AST: node kinds, source spans, tree nodes and traversals.

Every analysis stage (parsing, tree matching, pattern detection) works on
these trees. Nodes are frozen after construction and cache their size,
height and a structural hash, so matching can compare whole subtrees in
O(1) before falling back to a full isomorphism check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum, unique
from typing import Iterator


@unique
class NodeKind(Enum):
    """Closed set of syntactic categories for the analyzed language subset."""

    COMPILATION_UNIT = "CompilationUnit"
    CLASS_DECL = "ClassDecl"
    FIELD_DECL = "FieldDecl"
    METHOD_DECL = "MethodDecl"
    PARAMETER = "Parameter"
    BLOCK = "Block"
    IF = "If"
    ELSE = "Else"
    TERNARY = "Ternary"
    WHILE_LOOP = "WhileLoop"
    FOR_LOOP = "ForLoop"
    TRY_BLOCK = "TryBlock"
    CATCH_CLAUSE = "CatchClause"
    FINALLY_BLOCK = "FinallyBlock"
    RETURN = "Return"
    THROW = "Throw"
    BREAK = "Break"
    CONTINUE = "Continue"
    EXPRESSION_STMT = "ExpressionStmt"
    VAR_DECL = "VarDecl"
    ASSIGNMENT = "Assignment"
    BINARY_OP = "BinaryOp"
    UNARY_OP = "UnaryOp"
    METHOD_CALL = "MethodCall"
    FIELD_ACCESS = "FieldAccess"
    VARIABLE_READ = "VariableRead"
    ARRAY_ACCESS = "ArrayAccess"
    CONSTRUCTOR_CALL = "ConstructorCall"
    TYPE_REF = "TypeRef"
    MODIFIER = "Modifier"
    LITERAL_NULL = "LiteralNull"
    LITERAL_INT = "LiteralInt"
    LITERAL_FLOAT = "LiteralFloat"
    LITERAL_STRING = "LiteralString"
    LITERAL_BOOL = "LiteralBool"
    LITERAL_CHAR = "LiteralChar"


STATEMENT_KINDS = frozenset(
    {
        NodeKind.BLOCK,
        NodeKind.IF,
        NodeKind.ELSE,
        NodeKind.WHILE_LOOP,
        NodeKind.FOR_LOOP,
        NodeKind.TRY_BLOCK,
        NodeKind.CATCH_CLAUSE,
        NodeKind.FINALLY_BLOCK,
        NodeKind.RETURN,
        NodeKind.THROW,
        NodeKind.BREAK,
        NodeKind.CONTINUE,
        NodeKind.EXPRESSION_STMT,
        NodeKind.VAR_DECL,
    }
)

EXPRESSION_KINDS = frozenset(
    {
        NodeKind.TERNARY,
        NodeKind.ASSIGNMENT,
        NodeKind.BINARY_OP,
        NodeKind.UNARY_OP,
        NodeKind.METHOD_CALL,
        NodeKind.FIELD_ACCESS,
        NodeKind.VARIABLE_READ,
        NodeKind.ARRAY_ACCESS,
        NodeKind.CONSTRUCTOR_CALL,
        NodeKind.LITERAL_NULL,
        NodeKind.LITERAL_INT,
        NodeKind.LITERAL_FLOAT,
        NodeKind.LITERAL_STRING,
        NodeKind.LITERAL_BOOL,
        NodeKind.LITERAL_CHAR,
    }
)

LITERAL_KINDS = frozenset(
    {
        NodeKind.LITERAL_NULL,
        NodeKind.LITERAL_INT,
        NodeKind.LITERAL_FLOAT,
        NodeKind.LITERAL_STRING,
        NodeKind.LITERAL_BOOL,
        NodeKind.LITERAL_CHAR,
    }
)

# Statements with no nested statements inside them; used by the single-line
# detector's "single statement" clause.
SIMPLE_STATEMENT_KINDS = frozenset(
    {
        NodeKind.EXPRESSION_STMT,
        NodeKind.RETURN,
        NodeKind.THROW,
        NodeKind.BREAK,
        NodeKind.CONTINUE,
        NodeKind.VAR_DECL,
        NodeKind.FIELD_DECL,
    }
)


def is_statement_kind(kind: NodeKind) -> bool:
    return kind in STATEMENT_KINDS


def is_expression_kind(kind: NodeKind) -> bool:
    return kind in EXPRESSION_KINDS


@dataclass(frozen=True)
class SourceSpan:
    """1-based, inclusive region of a source file."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if self.start_line > self.end_line:
            raise ValueError(f"span start line {self.start_line} after end line {self.end_line}")
        if self.start_line == self.end_line and self.start_col > self.end_col:
            raise ValueError(f"span start col {self.start_col} after end col {self.end_col}")

    def lines(self) -> range:
        return range(self.start_line, self.end_line + 1)

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"


_node_ids = itertools.count(1)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF

_KIND_ORDINAL = {kind: i for i, kind in enumerate(NodeKind)}


def _fnv_mix(acc: int, data: bytes) -> int:
    for byte in data:
        acc = ((acc ^ byte) * _FNV_PRIME) & _U64
    return acc


class AstNode:
    """One tree node: a kind, an optional token label, and ordered children.

    The label holds only the token that distinguishes nodes of the same kind
    (identifier, operator symbol, literal lexeme); structure such as types and
    modifiers lives in child nodes. Instances are immutable once built and a
    node can belong to exactly one tree.
    """

    __slots__ = ("id", "kind", "label", "children", "span", "parent", "size", "height", "structural_hash")

    id: int
    kind: NodeKind
    label: str
    children: tuple["AstNode", ...]
    span: SourceSpan
    parent: "AstNode | None"
    size: int
    height: int
    structural_hash: int

    def __init__(self, kind: NodeKind, label: str, children: list["AstNode"] | tuple["AstNode", ...], span: SourceSpan):
        self.id = next(_node_ids)
        self.kind = kind
        self.label = label
        self.children = tuple(children)
        self.span = span
        self.parent = None
        size = 1
        height = 0
        acc = _fnv_mix(_FNV_OFFSET, _KIND_ORDINAL[kind].to_bytes(2, "big"))
        label_bytes = label.encode("utf-8")
        acc = _fnv_mix(acc, len(label_bytes).to_bytes(4, "big"))
        acc = _fnv_mix(acc, label_bytes)
        for child in self.children:
            if child.parent is not None:
                raise ValueError(f"node {child.id} already has a parent; trees may not share nodes")
            child.parent = self
            size += child.size
            height = max(height, child.height)
            acc = _fnv_mix(acc, child.structural_hash.to_bytes(8, "big"))
        self.size = size
        self.height = height + 1
        self.structural_hash = acc

    def __setattr__(self, name: str, value) -> None:
        if name == "parent" and getattr(self, "parent", None) is not None:
            raise AttributeError("AstNode is immutable after construction")
        if name not in AstNode.__slots__:
            raise AttributeError(name)
        if name != "parent" and hasattr(self, "structural_hash"):
            raise AttributeError("AstNode is immutable after construction")
        object.__setattr__(self, name, value)

    def __repr__(self) -> str:
        return f"AstNode({self.kind.value}, {self.label!r}, {len(self.children)} children, id={self.id})"

    def walk(self) -> Iterator["AstNode"]:
        """Preorder traversal of this subtree, including the node itself."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def preorder(root: AstNode) -> Iterator[AstNode]:
    return root.walk()


def postorder(root: AstNode) -> list[AstNode]:
    """All nodes of the tree, each after all of its descendants."""
    out: list[AstNode] = []
    stack: list[tuple[AstNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
        else:
            stack.append((node, True))
            stack.extend((child, False) for child in reversed(node.children))
    return out


def isomorphic(a: AstNode, b: AstNode) -> bool:
    """True iff the two subtrees match in kind, label and child order, recursively.

    The structural hash is a sound negative filter (different hash implies not
    isomorphic); equal hashes are confirmed by a full comparison so collisions
    cannot produce false positives.
    """
    if a.structural_hash != b.structural_hash:
        return False
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x.kind is not y.kind or x.label != y.label or len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def dump_tree(root: AstNode) -> str:
    """Debug dump: one node per line, indentation showing depth.

    Format: ``KIND "label" [startLine:startCol-endLine:endCol]``.
    """
    lines: list[str] = []

    def visit(node: AstNode, depth: int) -> None:
        s = node.span
        lines.append(f'{"  " * depth}{node.kind.value} "{node.label}" [{s.start_line}:{s.start_col}-{s.end_line}:{s.end_col}]')
        for child in node.children:
            visit(child, depth + 1)

    visit(root, 0)
    return "\n".join(lines) + "\n"
