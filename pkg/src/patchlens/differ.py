"""Tree matching and edit-script derivation between two ASTs.

Matching follows the GumTree two-phase scheme: a greedy top-down pass maps
isomorphic subtrees of height >= ``min_height``, then a bottom-up pass maps
container nodes whose mapped-descendant dice coefficient reaches
``min_dice`` and runs a recovery alignment inside each newly matched
container so small label edits surface as updates instead of
delete/insert pairs.

Edit scripts are produced with the classic Chawathe align-then-emit
algorithm (insert/update/move in breadth-first order over the after tree,
sibling alignment by LCS, deletions in postorder). The correctness bar is
the apply oracle: applying the script to the before tree must rebuild a
tree isomorphic to the after tree. Scripts are deterministic but not
guaranteed minimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .tree import AstNode, NodeKind, SourceSpan, isomorphic, postorder


@dataclass(frozen=True)
class DiffOptions:
    min_height: int = 2
    min_dice: float = 0.5

    def __post_init__(self) -> None:
        if self.min_height < 1:
            raise ValueError("min_height must be >= 1")
        if not (0.0 < self.min_dice <= 1.0):
            raise ValueError("min_dice must be in (0, 1]")


DEFAULT_OPTIONS = DiffOptions()

PHASE_TOP_DOWN = "top-down"
PHASE_BOTTOM_UP = "bottom-up"
PHASE_RECOVERY = "recovery"


class MappingStore:
    """Partial bijection between before-tree and after-tree nodes."""

    def __init__(self) -> None:
        self._by_src: dict[int, tuple[AstNode, AstNode]] = {}
        self._by_dst: dict[int, tuple[AstNode, AstNode]] = {}
        self._phase: dict[int, str] = {}

    def add(self, src: AstNode, dst: AstNode, phase: str) -> None:
        if src.id in self._by_src:
            raise ValueError(f"before node {src.id} is already mapped")
        if dst.id in self._by_dst:
            raise ValueError(f"after node {dst.id} is already mapped")
        self._by_src[src.id] = (src, dst)
        self._by_dst[dst.id] = (src, dst)
        self._phase[src.id] = phase

    def dst_for(self, src: AstNode) -> AstNode | None:
        pair = self._by_src.get(src.id)
        return pair[1] if pair else None

    def src_for(self, dst: AstNode) -> AstNode | None:
        pair = self._by_dst.get(dst.id)
        return pair[0] if pair else None

    def has_src(self, src: AstNode) -> bool:
        return src.id in self._by_src

    def has_dst(self, dst: AstNode) -> bool:
        return dst.id in self._by_dst

    def phase_of(self, src: AstNode) -> str | None:
        return self._phase.get(src.id)

    def pairs(self) -> Iterator[tuple[AstNode, AstNode]]:
        return iter(self._by_src.values())

    def __len__(self) -> int:
        return len(self._by_src)


# -- edit actions --------------------------------------------------------


@dataclass(frozen=True)
class Insert:
    """Insert a single node (children arrive via their own inserts)."""

    node: AstNode  # the after-tree node being materialized
    parent_after_id: int | None  # None when the node becomes the new root
    parent_before_id: int | None  # set when the parent is a mapped before node
    position: int


@dataclass(frozen=True)
class Delete:
    node: AstNode  # before-tree node; all its children are gone by then


@dataclass(frozen=True)
class Update:
    node: AstNode  # before-tree node whose label changes
    new_label: str
    after_node: AstNode  # mapped partner, for the after-side span


@dataclass(frozen=True)
class Move:
    node: AstNode  # before-tree node being re-homed
    parent_after_id: int | None
    parent_before_id: int | None
    position: int
    after_node: AstNode  # mapped partner, for the destination span


EditAction = Insert | Delete | Update | Move


@dataclass(frozen=True)
class EditScript:
    actions: tuple[EditAction, ...]

    def __iter__(self) -> Iterator[EditAction]:
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __bool__(self) -> bool:
        return bool(self.actions)

    def action_counts(self) -> dict[str, int]:
        counts = {"insert": 0, "delete": 0, "update": 0, "move": 0}
        for action in self.actions:
            if isinstance(action, Insert):
                counts["insert"] += 1
            elif isinstance(action, Delete):
                counts["delete"] += 1
            elif isinstance(action, Update):
                counts["update"] += 1
            else:
                counts["move"] += 1
        return counts


class ScriptApplyError(Exception):
    def __init__(self, index: int, message: str):
        super().__init__(f"action {index}: {message}")
        self.index = index


def lcs_pairs(a: Sequence, b: Sequence, eq: Callable) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence under ``eq``."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return []
    table = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la - 1, -1, -1):
        for j in range(lb - 1, -1, -1):
            if eq(a[i], b[j]):
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    out: list[tuple[int, int]] = []
    i = j = 0
    while i < la and j < lb:
        if eq(a[i], b[j]):
            out.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


# -- matching ------------------------------------------------------------


class _HeightQueue:
    """Nodes grouped by subtree height, served tallest first."""

    def __init__(self) -> None:
        self._by_height: dict[int, list[AstNode]] = {}

    def push(self, node: AstNode) -> None:
        self._by_height.setdefault(node.height, []).append(node)

    def open_node(self, node: AstNode) -> None:
        for child in node.children:
            self.push(child)

    def peek_height(self) -> int:
        return max(self._by_height) if self._by_height else 0

    def pop_tallest(self) -> list[AstNode]:
        height = self.peek_height()
        return self._by_height.pop(height)

    def __bool__(self) -> bool:
        return bool(self._by_height)


def _map_isomorphic_pair(mapping: MappingStore, a: AstNode, b: AstNode, phase: str) -> None:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        mapping.add(x, y, phase)
        stack.extend(zip(x.children, y.children))


def _top_down(mapping: MappingStore, before: AstNode, after: AstNode, opts: DiffOptions, post1: dict[int, int], post2: dict[int, int]) -> None:
    q1 = _HeightQueue()
    q2 = _HeightQueue()
    q1.push(before)
    q2.push(after)
    ambiguous: list[tuple[AstNode, AstNode]] = []

    while q1 and q2 and max(q1.peek_height(), q2.peek_height()) >= opts.min_height:
        h1, h2 = q1.peek_height(), q2.peek_height()
        if h1 != h2:
            taller = q1 if h1 > h2 else q2
            for node in taller.pop_tallest():
                taller.open_node(node)
            continue
        level1 = q1.pop_tallest()
        level2 = q2.pop_tallest()
        groups1: dict[int, list[AstNode]] = {}
        groups2: dict[int, list[AstNode]] = {}
        for node in level1:
            groups1.setdefault(node.structural_hash, []).append(node)
        for node in level2:
            groups2.setdefault(node.structural_hash, []).append(node)
        settled: set[int] = set()  # node ids that were mapped or deferred as candidates
        for digest, candidates1 in groups1.items():
            candidates2 = groups2.get(digest)
            if not candidates2:
                continue
            iso_pairs = [(a, b) for a in candidates1 for b in candidates2 if isomorphic(a, b)]
            if not iso_pairs:
                continue  # hash collision only; leave the nodes to be opened
            if len(iso_pairs) == 1 and len(candidates1) == 1 and len(candidates2) == 1:
                a, b = iso_pairs[0]
                _map_isomorphic_pair(mapping, a, b, PHASE_TOP_DOWN)
            else:
                ambiguous.extend(iso_pairs)
            for a, b in iso_pairs:
                settled.add(a.id)
                settled.add(b.id)
        for node in level1:
            if node.id not in settled and not mapping.has_src(node):
                q1.open_node(node)
        for node in level2:
            if node.id not in settled and not mapping.has_dst(node):
                q2.open_node(node)

    def tie_key(pair: tuple[AstNode, AstNode]) -> tuple[int, int, int, int]:
        a, b = pair
        parents_mapped = 0
        if a.parent is not None and b.parent is not None and mapping.dst_for(a.parent) is b.parent:
            parents_mapped = -1  # prefer pairs whose parents already agree
        return (parents_mapped, abs(post1[a.id] - post2[b.id]), post1[a.id], post2[b.id])

    for a, b in sorted(ambiguous, key=tie_key):
        if not mapping.has_src(a) and not mapping.has_dst(b):
            _map_isomorphic_pair(mapping, a, b, PHASE_TOP_DOWN)


def _subtree_range(node: AstNode, post: dict[int, int]) -> tuple[int, int]:
    end = post[node.id]
    return (end - node.size + 1, end)


def _dice(t1: AstNode, t2: AstNode, mapping: MappingStore, post2: dict[int, int]) -> float:
    lo, hi = _subtree_range(t2, post2)
    common = 0
    for d in t1.walk():
        if d is t1:
            continue
        partner = mapping.dst_for(d)
        if partner is not None and lo <= post2[partner.id] <= hi and partner is not t2:
            common += 1
    total = (t1.size - 1) + (t2.size - 1)
    if total == 0:
        return 0.0
    return 2.0 * common / total


def _recover(mapping: MappingStore, a: AstNode, b: AstNode) -> None:
    """Align the still-unmapped parts of a freshly matched container pair.

    Three LCS passes over the direct children (isomorphic subtrees, then
    same kind+label, then same kind) followed by a unique kind+label
    histogram match over remaining unmapped descendants, which rescues
    operands displaced across nesting levels.
    """
    ua = [c for c in a.children if not mapping.has_src(c)]
    ub = [c for c in b.children if not mapping.has_dst(c)]

    for i, j in lcs_pairs(ua, ub, isomorphic):
        _map_isomorphic_pair(mapping, ua[i], ub[j], PHASE_RECOVERY)
    ua = [c for c in ua if not mapping.has_src(c)]
    ub = [c for c in ub if not mapping.has_dst(c)]

    def same_kind_label(x: AstNode, y: AstNode) -> bool:
        return x.kind is y.kind and x.label == y.label

    for i, j in lcs_pairs(ua, ub, same_kind_label):
        mapping.add(ua[i], ub[j], PHASE_RECOVERY)
        _recover(mapping, ua[i], ub[j])
    ua = [c for c in ua if not mapping.has_src(c)]
    ub = [c for c in ub if not mapping.has_dst(c)]

    for i, j in lcs_pairs(ua, ub, lambda x, y: x.kind is y.kind):
        mapping.add(ua[i], ub[j], PHASE_RECOVERY)
        _recover(mapping, ua[i], ub[j])

    def unmapped_descendants(root: AstNode, mapped: Callable[[AstNode], bool]) -> list[AstNode]:
        out = []
        for node in root.walk():
            if node is not root and not mapped(node):
                out.append(node)
        return out

    hist_a: dict[tuple[NodeKind, str], list[AstNode]] = {}
    for node in unmapped_descendants(a, mapping.has_src):
        hist_a.setdefault((node.kind, node.label), []).append(node)
    hist_b: dict[tuple[NodeKind, str], list[AstNode]] = {}
    for node in unmapped_descendants(b, mapping.has_dst):
        hist_b.setdefault((node.kind, node.label), []).append(node)
    for key, nodes_a in hist_a.items():
        nodes_b = hist_b.get(key)
        if nodes_b is None or len(nodes_a) != 1 or len(nodes_b) != 1:
            continue
        x, y = nodes_a[0], nodes_b[0]
        if mapping.has_src(x) or mapping.has_dst(y):
            continue
        if isomorphic(x, y):
            _map_isomorphic_pair(mapping, x, y, PHASE_RECOVERY)
        else:
            mapping.add(x, y, PHASE_RECOVERY)
            _recover(mapping, x, y)


def _bottom_up(mapping: MappingStore, before: AstNode, after: AstNode, opts: DiffOptions, post1: dict[int, int], post2: dict[int, int]) -> None:
    for t1 in postorder(before):
        if t1 is before:
            if not mapping.has_src(t1) and not mapping.has_dst(after) and t1.kind is after.kind:
                mapping.add(t1, after, PHASE_BOTTOM_UP)
                _recover(mapping, t1, after)
            break
        if mapping.has_src(t1) or not t1.children:
            continue
        has_mapped_descendant = any(mapping.has_src(d) for d in t1.walk() if d is not t1)
        if not has_mapped_descendant:
            continue
        candidates: list[AstNode] = []
        seen: set[int] = set()
        for d in t1.walk():
            if d is t1:
                continue
            partner = mapping.dst_for(d)
            if partner is None:
                continue
            anc = partner.parent
            while anc is not None:
                if anc.id in seen:
                    break
                seen.add(anc.id)
                if anc.kind is t1.kind and not mapping.has_dst(anc):
                    candidates.append(anc)
                anc = anc.parent
        best: AstNode | None = None
        best_key: tuple[float, int, int] | None = None
        for t2 in candidates:
            dice = _dice(t1, t2, mapping, post2)
            if dice < opts.min_dice:
                continue
            key = (-dice, abs(post1[t1.id] - post2[t2.id]), post2[t2.id])
            if best_key is None or key < best_key:
                best, best_key = t2, key
        if best is not None:
            mapping.add(t1, best, PHASE_BOTTOM_UP)
            _recover(mapping, t1, best)


def match(before: AstNode, after: AstNode, options: DiffOptions = DEFAULT_OPTIONS) -> MappingStore:
    """Compute the node mapping between two trees."""
    mapping = MappingStore()
    post1 = {node.id: i for i, node in enumerate(postorder(before))}
    post2 = {node.id: i for i, node in enumerate(postorder(after))}
    _top_down(mapping, before, after, options, post1, post2)
    _bottom_up(mapping, before, after, options, post1, post2)
    return mapping


# -- edit script generation (Chawathe-style) -------------------------------


class _WorkNode:
    """Mutable shadow node used while simulating script application."""

    __slots__ = ("kind", "label", "children", "parent", "origin", "span")

    def __init__(self, kind: NodeKind | None, label: str, span: SourceSpan | None, origin: AstNode | None):
        self.kind = kind
        self.label = label
        self.children: list[_WorkNode] = []
        self.parent: _WorkNode | None = None
        self.origin = origin
        self.span = span


def _shadow_copy(node: AstNode, index: dict[int, _WorkNode]) -> _WorkNode:
    shadow = _WorkNode(node.kind, node.label, node.span, node)
    index[node.id] = shadow
    for child in node.children:
        child_shadow = _shadow_copy(child, index)
        child_shadow.parent = shadow
        shadow.children.append(child_shadow)
    return shadow


def _bfs(root: AstNode) -> list[AstNode]:
    out = [root]
    i = 0
    while i < len(out):
        out.extend(out[i].children)
        i += 1
    return out


def edit_script(before: AstNode, after: AstNode, mapping: MappingStore) -> EditScript:
    """Derive an edit script that rewrites ``before`` into ``after``.

    Action order: breadth-first inserts/updates/moves over the after tree
    with LCS child alignment, then deletions in postorder of the working
    tree. Parent references carry both the after-node id and, when the
    parent is a mapped node, its before-node id, so scripts can be applied
    with no access to the mapping.
    """
    shadow_by_before: dict[int, _WorkNode] = {}
    fake_src = _WorkNode(None, "", None, None)
    src_root = _shadow_copy(before, shadow_by_before)
    src_root.parent = fake_src
    fake_src.children.append(src_root)

    shadow_for_dst: dict[int, _WorkNode] = {}
    dst_for_shadow: dict[int, AstNode] = {}
    for src, dst in mapping.pairs():
        shadow = shadow_by_before[src.id]
        shadow_for_dst[dst.id] = shadow
        dst_for_shadow[id(shadow)] = dst

    dst_in_order: set[int] = set()
    actions: list[EditAction] = []

    def partner_shadow(x: AstNode | None) -> _WorkNode | None:
        if x is None:
            return fake_src
        return shadow_for_dst.get(x.id)

    def shadow_partner(w: _WorkNode) -> AstNode | None:
        return dst_for_shadow.get(id(w))

    def find_pos(x: AstNode) -> int:
        siblings: Sequence[AstNode] = x.parent.children if x.parent is not None else (x,)
        for c in siblings:
            if c.id in dst_in_order:
                if c is x:
                    return 0
                break
        rightmost: AstNode | None = None
        for c in siblings:
            if c is x:
                break
            if c.id in dst_in_order:
                rightmost = c
        if rightmost is None:
            return 0
        u = partner_shadow(rightmost)
        assert u is not None and u.parent is not None
        return u.parent.children.index(u) + 1

    def parent_refs(y: AstNode | None, z: _WorkNode) -> tuple[int | None, int | None]:
        after_id = y.id if y is not None else None
        before_id = z.origin.id if z.origin is not None else None
        return after_id, before_id

    def align_children(w: _WorkNode, x: AstNode) -> None:
        for c in x.children:
            dst_in_order.discard(c.id)
        s1 = [c for c in w.children if (d := shadow_partner(c)) is not None and d.parent is x]
        s2 = [c for c in x.children if (pw := partner_shadow(c)) is not None and pw.parent is w]
        lcs = lcs_pairs(s1, s2, lambda a, b: shadow_partner(a) is b)
        in_lcs = {(id(s1[i]), s2[j].id) for i, j in lcs}
        for i, j in lcs:
            dst_in_order.add(s2[j].id)
        for b_child in s2:
            for a_child in s1:
                if shadow_partner(a_child) is b_child and (id(a_child), b_child.id) not in in_lcs:
                    a_child.parent.children.remove(a_child)
                    k = find_pos(b_child)
                    after_id, before_id = parent_refs(x, w)
                    actions.append(Move(node=a_child.origin, parent_after_id=after_id, parent_before_id=before_id, position=k, after_node=b_child))
                    w.children.insert(k, a_child)
                    a_child.parent = w
                    dst_in_order.add(b_child.id)

    for x in _bfs(after):
        y = x.parent
        z = partner_shadow(y)
        assert z is not None, "parent must be mapped or already inserted"
        w = partner_shadow(x)
        if w is None:
            k = find_pos(x)
            w = _WorkNode(x.kind, x.label, x.span, None)
            w.parent = z
            z.children.insert(k, w)
            shadow_for_dst[x.id] = w
            dst_for_shadow[id(w)] = x
            after_id, before_id = parent_refs(y, z)
            actions.append(Insert(node=x, parent_after_id=after_id, parent_before_id=before_id, position=k))
        else:
            if w.label != x.label:
                actions.append(Update(node=w.origin, new_label=x.label, after_node=x))
                w.label = x.label
            if w.parent is not z:
                k = find_pos(x)
                after_id, before_id = parent_refs(y, z)
                actions.append(Move(node=w.origin, parent_after_id=after_id, parent_before_id=before_id, position=k, after_node=x))
                w.parent.children.remove(w)
                z.children.insert(k, w)
                w.parent = z
        dst_in_order.add(x.id)
        align_children(w, x)

    def delete_unmapped(w: _WorkNode) -> None:
        for child in list(w.children):
            delete_unmapped(child)
        if w is not fake_src and shadow_partner(w) is None:
            actions.append(Delete(node=w.origin))
            w.parent.children.remove(w)

    delete_unmapped(fake_src)
    return EditScript(tuple(actions))


def apply_script(before: AstNode, script: EditScript) -> AstNode:
    """Replay a script against ``before`` and freeze the resulting tree.

    This is the differ's own oracle: the result must be isomorphic to the
    after tree the script was derived from.
    """
    shadow_by_before: dict[int, _WorkNode] = {}
    fake_root = _WorkNode(None, "", None, None)
    root = _shadow_copy(before, shadow_by_before)
    root.parent = fake_root
    fake_root.children.append(root)
    inserted_by_after: dict[int, _WorkNode] = {}

    def resolve_parent(index: int, after_id: int | None, before_id: int | None) -> _WorkNode:
        if after_id is not None and after_id in inserted_by_after:
            return inserted_by_after[after_id]
        if before_id is not None:
            shadow = shadow_by_before.get(before_id)
            if shadow is None:
                raise ScriptApplyError(index, f"unknown parent node id {before_id}")
            return shadow
        if after_id is None:
            return fake_root
        raise ScriptApplyError(index, f"unresolvable parent reference {after_id}")

    for index, action in enumerate(script):
        if isinstance(action, Insert):
            parent = resolve_parent(index, action.parent_after_id, action.parent_before_id)
            if not (0 <= action.position <= len(parent.children)):
                raise ScriptApplyError(index, f"insert position {action.position} out of range")
            w = _WorkNode(action.node.kind, action.node.label, action.node.span, None)
            w.parent = parent
            parent.children.insert(action.position, w)
            inserted_by_after[action.node.id] = w
        elif isinstance(action, Update):
            shadow = shadow_by_before.get(action.node.id)
            if shadow is None:
                raise ScriptApplyError(index, f"unknown node id {action.node.id}")
            shadow.label = action.new_label
        elif isinstance(action, Move):
            shadow = shadow_by_before.get(action.node.id)
            if shadow is None or shadow.parent is None:
                raise ScriptApplyError(index, f"unknown or detached node id {action.node.id}")
            parent = resolve_parent(index, action.parent_after_id, action.parent_before_id)
            shadow.parent.children.remove(shadow)
            if not (0 <= action.position <= len(parent.children)):
                raise ScriptApplyError(index, f"move position {action.position} out of range")
            parent.children.insert(action.position, shadow)
            shadow.parent = parent
        elif isinstance(action, Delete):
            shadow = shadow_by_before.get(action.node.id)
            if shadow is None or shadow.parent is None:
                raise ScriptApplyError(index, f"unknown or detached node id {action.node.id}")
            shadow.parent.children.remove(shadow)
            shadow.parent = None
        else:  # pragma: no cover - closed union
            raise ScriptApplyError(index, f"unknown action {action!r}")

    if len(fake_root.children) != 1:
        raise ScriptApplyError(len(script.actions), f"script left {len(fake_root.children)} roots")

    fallback_span = before.span

    def freeze(w: _WorkNode) -> AstNode:
        children = [freeze(c) for c in w.children]
        assert w.kind is not None
        return AstNode(w.kind, w.label, children, w.span or fallback_span)

    return freeze(fake_root.children[0])


def dump_script(script: EditScript) -> str:
    """Textual action dump, one action per line."""
    kind_of = {Insert: "INSERT", Delete: "DELETE", Update: "UPDATE", Move: "MOVE"}
    lines = []
    for action in script:
        verb = kind_of[type(action)]
        node = action.node
        line = f'{verb}  {node.kind.value} "{node.label}"  @{node.span}'
        if isinstance(action, (Insert, Move)):
            parent = _parent_desc(action)
            line += f"  -> parent {parent} pos {action.position}"
        elif isinstance(action, Update):
            line += f'  -> "{action.new_label}"'
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def _parent_desc(action: Insert | Move) -> str:
    node = action.node if isinstance(action, Insert) else action.after_node
    parent = node.parent
    return parent.kind.value if parent is not None else "(root)"
