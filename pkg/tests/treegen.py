"""Seeded random tree generation and mutation for differ fuzzing."""

from __future__ import annotations

import random

from patchlens.tree import AstNode, NodeKind, SourceSpan

KINDS = list(NodeKind)
LABELS = ["", "a", "b", "x", "y", "count", "value", "run", "+", "-", "==", "0", "1", "text"]

_SPAN = SourceSpan("fuzz.java", 1, 1, 1, 1)


def random_tree(rng: random.Random, max_depth: int = 8, max_branch: int = 5, max_nodes: int = 60) -> AstNode:
    budget = [max_nodes]

    def build(depth: int) -> AstNode:
        budget[0] -= 1
        children = []
        if depth < max_depth:
            for _ in range(rng.randint(0, max_branch)):
                if budget[0] <= 0:
                    break
                children.append(build(depth + 1))
        return AstNode(rng.choice(KINDS), rng.choice(LABELS), children, _SPAN)

    return build(1)


class MutableNode:
    __slots__ = ("kind", "label", "children", "parent")

    def __init__(self, kind: NodeKind, label: str):
        self.kind = kind
        self.label = label
        self.children: list[MutableNode] = []
        self.parent: MutableNode | None = None


def to_mutable(node: AstNode) -> MutableNode:
    m = MutableNode(node.kind, node.label)
    for child in node.children:
        cm = to_mutable(child)
        cm.parent = m
        m.children.append(cm)
    return m


def freeze(m: MutableNode) -> AstNode:
    return AstNode(m.kind, m.label, [freeze(c) for c in m.children], _SPAN)


def _collect(root: MutableNode) -> list[MutableNode]:
    out = [root]
    i = 0
    while i < len(out):
        out.extend(out[i].children)
        i += 1
    return out


def _in_subtree(node: MutableNode, root: MutableNode) -> bool:
    cur: MutableNode | None = node
    while cur is not None:
        if cur is root:
            return True
        cur = cur.parent
    return False


def _random_subtree(rng: random.Random, depth: int = 2) -> MutableNode:
    node = MutableNode(rng.choice(KINDS), rng.choice(LABELS))
    if depth > 0:
        for _ in range(rng.randint(0, 2)):
            child = _random_subtree(rng, depth - 1)
            child.parent = node
            node.children.append(child)
    return node


def mutate(rng: random.Random, root: MutableNode, operations: int) -> None:
    """Apply relabel / insert-subtree / delete-subtree / move-subtree edits."""
    for _ in range(operations):
        op = rng.choice(("relabel", "insert", "delete", "move"))
        nodes = _collect(root)
        if op == "relabel":
            target = rng.choice(nodes)
            target.label = rng.choice([label for label in LABELS if label != target.label])
        elif op == "insert":
            target = rng.choice(nodes)
            sub = _random_subtree(rng)
            sub.parent = target
            target.children.insert(rng.randint(0, len(target.children)), sub)
        elif op == "delete":
            non_root = [n for n in nodes if n is not root]
            if not non_root:
                continue
            target = rng.choice(non_root)
            target.parent.children.remove(target)
            target.parent = None
        elif op == "move":
            non_root = [n for n in nodes if n is not root]
            if not non_root:
                continue
            moved = rng.choice(non_root)
            destinations = [n for n in nodes if not _in_subtree(n, moved)]
            if not destinations:
                continue
            dest = rng.choice(destinations)
            moved.parent.children.remove(moved)
            moved.parent = dest
            dest.children.insert(rng.randint(0, len(dest.children)), moved)


def mutated_pair(rng: random.Random, max_depth: int = 8, operations: int | None = None) -> tuple[AstNode, AstNode]:
    before = random_tree(rng, max_depth=max_depth)
    mutable = to_mutable(before)
    ops = operations if operations is not None else rng.randint(1, 5)
    mutate(rng, mutable, ops)
    return before, freeze(mutable)
