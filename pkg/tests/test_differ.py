"""Differ: mapping phases, script shape, apply oracle, determinism."""

from __future__ import annotations

import random

import pytest

from treegen import mutated_pair
from patchlens.differ import (
    PHASE_BOTTOM_UP,
    PHASE_TOP_DOWN,
    Delete,
    Insert,
    Move,
    ScriptApplyError,
    Update,
    apply_script,
    dump_script,
    edit_script,
    match,
)
from patchlens.parser import parse
from patchlens.tree import NodeKind, isomorphic, postorder


def diff_pair(before_text: str, after_text: str, name: str = "D.java"):
    before = parse(before_text, name)
    after = parse(after_text, name)
    mapping = match(before, after)
    script = edit_script(before, after, mapping)
    return before, after, mapping, script


def assert_mapping_invariants(before, after, mapping):
    seen_src, seen_dst = set(), set()
    for src, dst in mapping.pairs():
        assert src.id not in seen_src and dst.id not in seen_dst, "mapping must stay a partial bijection"
        seen_src.add(src.id)
        seen_dst.add(dst.id)
        assert src.kind is dst.kind, "mapped pairs must agree on kind"
        if mapping.phase_of(src) == PHASE_TOP_DOWN:
            assert isomorphic(src, dst)


def test_identical_trees_map_positionally_and_yield_empty_script():
    text = """class C {
    int m(int a) {
        if (a > 0) {
            return a;
        }
        return 0;
    }
}
"""
    before, after, mapping, script = diff_pair(text, text)
    assert len(script) == 0
    assert len(mapping) == before.size == after.size
    for src, dst in zip(postorder(before), postorder(after)):
        assert mapping.dst_for(src) is dst


def test_single_label_change_yields_one_update():
    before, after, mapping, script = diff_pair(
        "class C { int m() { return 0; } }",
        "class C { int m() { return 1; } }",
    )
    assert len(script) == 1
    action = script.actions[0]
    assert isinstance(action, Update)
    assert action.node.kind is NodeKind.LITERAL_INT
    assert action.node.label == "0"
    assert action.new_label == "1"
    assert isomorphic(apply_script(before, script), after)


def test_unchanged_statement_stays_mapped_next_to_inserted_guard():
    before_text = """class C {
    Registry markers;
    boolean remove(Marker marker) {
        boolean removed = markers.remove(marker);
        return removed;
    }
}
"""
    after_text = before_text.replace(
        "        boolean removed = markers.remove(marker);",
        "        if (markers == null) {\n            return false;\n        }\n        boolean removed = markers.remove(marker);",
    )
    before, after, mapping, script = diff_pair(before_text, after_text)
    assert_mapping_invariants(before, after, mapping)
    decl_before = next(n for n in before.walk() if n.kind is NodeKind.VAR_DECL and n.label == "removed")
    decl_after = next(n for n in after.walk() if n.kind is NodeKind.VAR_DECL and n.label == "removed")
    assert mapping.dst_for(decl_before) is decl_after
    inserted_if = next(n for n in after.walk() if n.kind is NodeKind.IF)
    assert all(mapping.src_for(n) is None for n in inserted_if.walk())


def test_wrapped_statements_map_into_new_guard_body():
    before_text = """class C {
    void draw(Plot plot) {
        Info owner = plot.getOwner();
        Entities entities = owner.getEntities();
        if (entities != null) {
            entities.add(this);
        }
    }
}
"""
    after_text = """class C {
    void draw(Plot plot) {
        Info owner = plot.getOwner();
        if (owner != null) {
            Entities entities = owner.getEntities();
            if (entities != null) {
                entities.add(this);
            }
        }
    }
}
"""
    before, after, mapping, script = diff_pair(before_text, after_text)
    assert_mapping_invariants(before, after, mapping)
    inner_before = [n for n in before.walk() if n.kind is NodeKind.IF][0]
    outer_after, inner_after = [n for n in after.walk() if n.kind is NodeKind.IF][:2]
    assert mapping.dst_for(inner_before) is inner_after
    # the surviving inner guard now lives inside the inserted outer guard
    anc = inner_after.parent
    seen_outer = False
    while anc is not None:
        if anc is outer_after:
            seen_outer = True
        anc = anc.parent
    assert seen_outer
    assert mapping.src_for(outer_after) is None


def test_ternary_script_contains_expected_actions_and_applies():
    before_text = """class C {
    void check(Description description, Object wanted) {
        description.appendText(wanted.toString());
    }
}
"""
    after_text = before_text.replace("wanted.toString()", 'wanted == null ? "null" : wanted.toString()')
    before, after, mapping, script = diff_pair(before_text, after_text)
    inserted_kinds = {(a.node.kind, a.node.label) for a in script if isinstance(a, Insert)}
    assert (NodeKind.TERNARY, "") in inserted_kinds
    assert (NodeKind.BINARY_OP, "==") in inserted_kinds
    assert (NodeKind.LITERAL_NULL, "null") in inserted_kinds
    assert (NodeKind.LITERAL_STRING, "null") in inserted_kinds
    moves = [a for a in script if isinstance(a, Move)]
    assert any(a.node.kind is NodeKind.METHOD_CALL and a.node.label == "toString" for a in moves)
    assert isomorphic(apply_script(before, script), after)


def test_empty_script_applies_to_isomorphic_tree():
    before = parse("class C { void m() { run(); } }", "C.java")
    after = parse("class C { void m() { run(); } }", "C.java")
    script = edit_script(before, after, match(before, after))
    assert len(script) == 0
    assert isomorphic(apply_script(before, script), before)


def test_apply_error_names_offending_action_index():
    before, after, mapping, script = diff_pair(
        "class C { int m() { return 0; } }",
        "class C { int m() { return 1; } }",
    )
    other = parse("class D { }", "D.java")
    with pytest.raises(ScriptApplyError) as excinfo:
        apply_script(other, script)
    assert excinfo.value.index == 0


def test_determinism_same_inputs_same_script():
    before_text = """class C {
    void m(int a, int b) {
        one(a);
        two(b);
        three(a, b);
    }
}
"""
    after_text = """class C {
    void m(int a, int b) {
        two(b);
        one(a);
        if (a > b) {
            three(a, b);
        }
    }
}
"""
    dumps = set()
    for _ in range(3):
        _, _, _, script = diff_pair(before_text, after_text)
        dumps.add(dump_script(script))
    assert len(dumps) == 1


def test_dump_script_format():
    _, _, _, script = diff_pair(
        "class C { int m() { return value; } }",
        "class C { int m() { return clamp(value); } }",
    )
    dump = dump_script(script)
    for line in dump.splitlines():
        assert line.split("  ")[0] in ("INSERT", "DELETE", "UPDATE", "MOVE")
        assert "@" in line
    assert any(line.startswith("INSERT  MethodCall") and "-> parent" in line for line in dump.splitlines())


def test_fuzzed_apply_oracle_small():
    rng = random.Random(99)
    for _ in range(200):
        before, after = mutated_pair(rng, max_depth=6)
        mapping = match(before, after)
        assert_mapping_invariants(before, after, mapping)
        script = edit_script(before, after, mapping)
        result = apply_script(before, script)
        assert isomorphic(result, after)


def test_self_diff_over_generated_trees_is_empty():
    rng = random.Random(3)
    for _ in range(50):
        before, _ = mutated_pair(rng, operations=0)
        script = edit_script(before, before, match(before, before))
        assert len(script) == 0
