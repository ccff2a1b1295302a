"""Harness: strict diff application, case analysis, oracle comparison, metrics."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import make_patch, write_case
from patchlens.harness import (
    DiffApplyError,
    EvaluationCounts,
    OracleAnnotation,
    PatchCase,
    analyze_patch,
    apply_unified_diff,
    compare_to_oracle,
    compute_metrics,
    load_case,
    load_oracle,
    metrics_to_dict,
    parse_unified_diff,
    report_to_dict,
    reports_to_json,
    run_corpus,
)
from patchlens.patterns import PatternId


class TestDiffApplication:
    def test_empty_diff_is_identity(self):
        assert apply_unified_diff("class C { }\n", "") == "class C { }\n"

    def test_insertion_hunk_matches_stated_line_numbers(self):
        # guard block inserted at old line 2166 so the anchored statement
        # lands on new line 2169
        filler = [f"// filler {i}" for i in range(1, 2163)]
        body = [
            "    boolean removeMarker(Marker marker) {",
            "        // locate collection",
            "        // check arguments",
            "        boolean removed = markers.remove(marker);",
            "        return removed;",
            "    }",
        ]
        before = "\n".join(filler + body) + "\n"
        assert before.splitlines()[2165] == "        boolean removed = markers.remove(marker);"
        diff = """--- a/Plot.java
+++ b/Plot.java
@@ -2163,4 +2163,7 @@
     boolean removeMarker(Marker marker) {
         // locate collection
         // check arguments
+        if (markers == null) {
+            return false;
+        }
         boolean removed = markers.remove(marker);
"""
        after = apply_unified_diff(before, diff)
        lines = after.splitlines()
        assert lines[2168] == "        boolean removed = markers.remove(marker);"  # new line 2169
        assert lines[2165] == "        if (markers == null) {"
        assert lines[2166] == "            return false;"
        assert lines[2167] == "        }"

    def test_context_mismatch_names_hunk_and_line(self):
        before = "alpha\nbeta\ngamma\n"
        diff = """--- a/X.java
+++ b/X.java
@@ -1,3 +1,3 @@
 alpha
-WRONG
+beta2
 gamma
"""
        with pytest.raises(DiffApplyError) as excinfo:
            apply_unified_diff(before, diff)
        message = str(excinfo.value)
        assert "hunk 1" in message
        assert "line 2" in message

    def test_multi_file_diff_split(self):
        before = {"A.java": "class A { }\n", "B.java": "class B { }\n"}
        after = {"A.java": "class A { int x; }\n", "B.java": "class B { int y; }\n"}
        files = parse_unified_diff(make_patch(before, after))
        assert [f.path for f in files] == ["A.java", "B.java"]

    def test_new_file_diff(self):
        patch = make_patch({}, {"N.java": "class N { }\n"})
        files = parse_unified_diff(patch)
        assert files[0].old_path is None
        assert files[0].new_path == "N.java"

    def test_round_trip_through_difflib(self):
        before = "class C {\n    void m() {\n        one();\n        two();\n    }\n}\n"
        after = "class C {\n    void m() {\n        one();\n        three();\n        two();\n    }\n}\n"
        patch = make_patch({"C.java": before}, {"C.java": after})
        assert apply_unified_diff(before, patch) == after


class TestAnalyzePatch:
    def test_empty_diff_empty_report(self):
        case = PatchCase("empty", {"C.java": "class C { }\n"}, "")
        report = analyze_patch(case)
        assert report.error is None
        assert report.files == ()
        assert report.instances == ()

    def test_replicated_guard_case_detects_three_families(self, corpus_dir: Path):
        before = """class MarkerPlot {
    Registry markers;
    Registry rangeMarkers;
    Registry domainNotes;
    Registry rangeNotes;
    boolean removeMarker(Marker marker) {
        boolean removed = markers.remove(marker);
        notifyChange();
        return removed;
    }
    boolean removeRangeMarker(Marker marker) {
        boolean gone = rangeMarkers.remove(marker);
        fireRangeEvent();
        return gone;
    }
    boolean removeDomainNote(Note note) {
        boolean dropped = domainNotes.remove(note);
        fireDomainEvent();
        return dropped;
    }
    boolean removeRangeNote(Note note) {
        boolean cleared = rangeNotes.remove(note);
        fireNoteEvent();
        return cleared;
    }
}
"""
        after = before
        for field in ("markers", "rangeMarkers", "domainNotes", "rangeNotes"):
            needle = f"        boolean {{var}} = {field}.remove("
            # insert the guard before the first statement of each method
            for line in before.splitlines():
                if f"= {field}.remove(" in line:
                    guard = f"        if ({field} == null) {{\n            return false;\n        }}\n"
                    after = after.replace(line + "\n", guard + line + "\n")
        case_dir = write_case(corpus_dir, "chart14-style", {"Plot.java": before}, {"Plot.java": after})
        report = analyze_patch(load_case(case_dir))
        assert report.error is None
        detected = {p.value for p in report.pattern_ids()}
        assert detected == {"missNullCheckPositive", "condBlockAddWithReturn", "copyPaste"}
        copy = [i for i in report.instances if i.pattern_id is PatternId.COPY_PASTE][0]
        assert len(copy.anchors) == 4

    def test_cross_file_copy_paste_merging(self, corpus_dir: Path):
        before = {
            "L.java": "class L {\n    int n;\n    void a() {\n        runA();\n    }\n}\n",
            "R.java": "class R {\n    int n;\n    void b() {\n        runB();\n    }\n}\n",
        }
        after = {
            "L.java": "class L {\n    int n;\n    void a() {\n        runA();\n        n = n + 1;\n    }\n}\n",
            "R.java": "class R {\n    int n;\n    void b() {\n        runB();\n        n = n + 1;\n    }\n}\n",
        }
        case_dir = write_case(corpus_dir, "xfile", before, after)
        report = analyze_patch(load_case(case_dir))
        copy = [i for i in report.instances if i.pattern_id is PatternId.COPY_PASTE]
        assert copy, "clone sites across files must merge into one detection"
        files = {a.span.file for a in copy[0].anchors}
        assert files == {"L.java", "R.java"}

    def test_single_line_needs_single_changed_file(self, corpus_dir: Path):
        before = {
            "A.java": "class A { int m() { return 0; } }\n",
            "B.java": "class B { int m() { return 5; } }\n",
        }
        after = {
            "A.java": "class A { int m() { return 1; } }\n",
            "B.java": "class B { int m() { return 6; } }\n",
        }
        case_dir = write_case(corpus_dir, "twofiles", before, after)
        report = analyze_patch(load_case(case_dir))
        assert PatternId.SINGLE_LINE not in report.pattern_ids()

    def test_parse_failure_is_case_level_error(self, corpus_dir: Path):
        write_case(corpus_dir, "bad", {"C.java": "class C { void m() { @ } }\n"}, {"C.java": "class C { void m() { @@ } }\n"})
        write_case(corpus_dir, "good", {"C.java": "class C { int m() { return 0; } }\n"}, {"C.java": "class C { int m() { return 1; } }\n"})
        reports = run_corpus(corpus_dir)
        by_id = {r.case_id: r for r in reports}
        assert by_id["bad"].error is not None
        assert "C.java" in by_id["bad"].error
        assert by_id["good"].error is None
        assert by_id["good"].pattern_ids() == {PatternId.SINGLE_LINE, PatternId.CONSTANT_CHANGE}

    def test_report_json_shape_and_determinism(self, corpus_dir: Path):
        write_case(
            corpus_dir,
            "simple",
            {"C.java": "class C { int m() { return 0; } }\n"},
            {"C.java": "class C { int m() { return 1; } }\n"},
        )
        first = reports_to_json(run_corpus(corpus_dir))
        second = reports_to_json(run_corpus(corpus_dir))
        assert first == second
        payload = json.loads(first)
        entry = payload[0]
        assert set(entry) == {"caseId", "files", "patterns"}
        assert entry["files"][0]["actions"] == {"insert": 0, "delete": 0, "update": 1, "move": 0}
        pattern = entry["patterns"][0]
        assert set(pattern) >= {"id", "group", "anchors"}
        anchor = pattern["anchors"][0]
        assert set(anchor) == {"file", "side", "startLine", "endLine"}

    def test_timing_not_serialized_but_tracked(self):
        case = PatchCase("t", {"C.java": "class C { }\n"}, "")
        report = analyze_patch(case)
        assert report.timing_ms >= 0.0
        assert "timing" not in json.dumps(report_to_dict(report))

    def test_parallel_runs_keep_order_and_bytes(self, corpus_dir: Path):
        for i in range(6):
            write_case(
                corpus_dir,
                f"case{i}",
                {"C.java": f"class C{i} {{ int m() {{ return {i}; }} }}\n"},
                {"C.java": f"class C{i} {{ int m() {{ return {i + 1}; }} }}\n"},
            )
        serial = reports_to_json(run_corpus(corpus_dir, jobs=1))
        parallel = reports_to_json(run_corpus(corpus_dir, jobs=4))
        assert serial == parallel


class TestOracleComparison:
    def _report(self, case_id: str, *ids: PatternId):
        case = PatchCase(case_id, {"C.java": "class C { }\n"}, "")
        base = analyze_patch(case)
        instances = tuple()
        report = base
        # fabricate detection sets via replace-like reconstruction
        from dataclasses import replace
        from patchlens.patterns import Anchor, PatternInstance
        from patchlens.tree import SourceSpan

        anchor = Anchor(SourceSpan("C.java", 1, 1, 1, 1), "after")
        instances = tuple(PatternInstance(pid, (anchor,)) for pid in ids)
        return replace(report, instances=instances)

    def test_full_agreement(self):
        reports = [self._report("a", PatternId.SINGLE_LINE)]
        oracles = [OracleAnnotation("a", frozenset({PatternId.SINGLE_LINE}))]
        comparison = compare_to_oracle(reports, oracles)
        assert comparison.overall.agree == 1
        assert comparison.overall.detector_only == 0
        assert comparison.overall.oracle_only == 0
        assert comparison.cases == ()

    def test_detector_only_entry(self):
        reports = [self._report("a", PatternId.COPY_PASTE)]
        oracles = [OracleAnnotation("a", frozenset())]
        comparison = compare_to_oracle(reports, oracles)
        assert comparison.per_pattern[PatternId.COPY_PASTE].detector_only == 1
        assert comparison.cases[0].detector_only == (PatternId.COPY_PASTE,)

    def test_oracle_only_entry(self):
        reports = [self._report("a")]
        oracles = [OracleAnnotation("a", frozenset({PatternId.EXP_ARITH_MOD}))]
        comparison = compare_to_oracle(reports, oracles)
        assert comparison.per_pattern[PatternId.EXP_ARITH_MOD].oracle_only == 1

    def test_unknown_case_id_is_an_error(self):
        reports = [self._report("a")]
        oracles = [OracleAnnotation("b", frozenset())]
        with pytest.raises(ValueError):
            compare_to_oracle(reports, oracles)

    def test_oracle_round_trip_via_file(self, corpus_dir: Path):
        case_dir = write_case(
            corpus_dir,
            "annotated",
            {"C.java": "class C { int m() { return 0; } }\n"},
            {"C.java": "class C { int m() { return 1; } }\n"},
            expected=["singleLine", "constantChange"],
        )
        oracle = load_oracle(case_dir)
        assert oracle is not None
        assert oracle.expected == frozenset({PatternId.SINGLE_LINE, PatternId.CONSTANT_CHANGE})
        report = analyze_patch(load_case(case_dir))
        comparison = compare_to_oracle([report], [oracle])
        assert comparison.overall.agree == 2
        assert comparison.overall.detector_only == 0
        assert comparison.overall.oracle_only == 0


class TestMetrics:
    def test_published_overall_tally(self):
        counts = EvaluationCounts(
            agreements=666,
            both_acceptable=33,
            detector_correct=90,
            detector_wrong=73,
            human_correct=65,
            human_wrong=24,
        )
        metrics = compute_metrics(counts)
        assert metrics.tp == 789
        assert metrics.precision == pytest.approx(0.9153, abs=0.0001)
        assert metrics.recall == pytest.approx(0.9239, abs=0.0001)
        assert metrics_to_dict(metrics) == {"tp": 789, "precision": 0.9153, "recall": 0.9239}

    def test_perfect_agreement(self):
        metrics = compute_metrics(EvaluationCounts(10, 0, 0, 0, 0))
        assert metrics.tp == 10
        assert metrics.precision == 1.0
        assert metrics.recall == 1.0

    def test_zero_denominator_convention(self):
        metrics = compute_metrics(EvaluationCounts(0, 0, 0, 5, 0))
        assert metrics.tp == 0
        assert metrics.precision == 0.0
        assert metrics.recall == 1.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            EvaluationCounts(-1, 0, 0, 0, 0)

    def test_human_wrong_is_tracked_but_unused(self):
        a = compute_metrics(EvaluationCounts(5, 1, 1, 1, 1, human_wrong=0))
        b = compute_metrics(EvaluationCounts(5, 1, 1, 1, 1, human_wrong=40))
        assert a == b
