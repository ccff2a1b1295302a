"""CLI contract: exit codes, output schemas, flags, figures."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import write_case
from patchlens.cli import main


def _simple_case(corpus: Path, case_id: str = "simple") -> None:
    write_case(
        corpus,
        case_id,
        {"C.java": "class C { int m() { return 0; } }\n"},
        {"C.java": "class C { int m() { return 1; } }\n"},
        expected=["singleLine", "constantChange"],
    )


def test_missing_corpus_is_config_error(tmp_path, capsys):
    code = main(["detect", "--corpus", str(tmp_path / "nope")])
    assert code == 2
    assert "corpus" in capsys.readouterr().err


def test_detect_empty_corpus_exits_zero_with_empty_array(corpus_dir, capsys):
    code = main(["detect", "--corpus", str(corpus_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert json.loads(out) == []


def test_detect_writes_reports(corpus_dir, tmp_path, capsys):
    _simple_case(corpus_dir)
    out_file = tmp_path / "reports.json"
    code = main(["detect", "--corpus", str(corpus_dir), "--out", str(out_file)])
    assert code == 0
    payload = json.loads(out_file.read_text())
    assert payload[0]["caseId"] == "simple"
    ids = {p["id"] for p in payload[0]["patterns"]}
    assert ids == {"singleLine", "constantChange"}


def test_detect_case_error_exits_one(corpus_dir, capsys):
    _simple_case(corpus_dir, "good")
    write_case(corpus_dir, "broken", {"C.java": "class C { void m() { @ } }\n"}, {"C.java": "class C { }\n"})
    code = main(["detect", "--corpus", str(corpus_dir)])
    captured = capsys.readouterr()
    assert code == 1
    assert "broken" in captured.err
    payload = json.loads(captured.out)  # stdout stays machine-parseable
    assert {entry["caseId"] for entry in payload} == {"good", "broken"}


def test_detect_case_filter(corpus_dir, capsys):
    _simple_case(corpus_dir, "alpha")
    _simple_case(corpus_dir, "beta")
    code = main(["detect", "--corpus", str(corpus_dir), "--case", "al*"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert [entry["caseId"] for entry in payload] == ["alpha"]


def test_detect_text_format_is_delimited(corpus_dir, capsys, monkeypatch):
    monkeypatch.setenv("PATCHLENS_NO_COLOR", "1")
    _simple_case(corpus_dir)
    code = main(["detect", "--corpus", str(corpus_dir), "--format", "text"])
    out = capsys.readouterr().out
    assert code == 0
    header = out.splitlines()[0]
    assert header.split("\t") == ["case", "pattern", "group", "anchors", "note"]
    assert "\x1b[" not in out


def test_diff_command_dumps_actions(corpus_dir, capsys):
    _simple_case(corpus_dir)
    code = main(["diff", "--corpus", str(corpus_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert "== case simple" in out
    assert any(line.startswith("UPDATE  LiteralInt") for line in out.splitlines())


def test_evaluate_with_counts_reproduces_published_metrics(corpus_dir, tmp_path, capsys):
    counts_file = tmp_path / "counts.json"
    counts_file.write_text(json.dumps({"A": 666, "B": 33, "DC": 90, "DW": 73, "HC": 65, "HW": 24}))
    code = main(["evaluate", "--corpus", str(corpus_dir), "--counts", str(counts_file)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["metrics"] == {"tp": 789, "precision": 0.9153, "recall": 0.9239}


def test_evaluate_compares_to_oracles(corpus_dir, capsys):
    _simple_case(corpus_dir)
    code = main(["evaluate", "--corpus", str(corpus_dir)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["overall"]["agree"] == 2
    assert payload["perPattern"]["singleLine"]["agree"] == 1


def test_evaluate_bad_counts_is_config_error(corpus_dir, tmp_path, capsys):
    counts_file = tmp_path / "counts.json"
    counts_file.write_text(json.dumps({"A": 1}))
    code = main(["evaluate", "--corpus", str(corpus_dir), "--counts", str(counts_file)])
    assert code == 2


def test_unknown_flag_is_config_error(corpus_dir):
    assert main(["detect", "--corpus", str(corpus_dir), "--bogus"]) == 2


def test_bad_threshold_is_config_error(corpus_dir, capsys):
    assert main(["detect", "--corpus", str(corpus_dir), "--min-height", "0"]) == 2
    assert main(["detect", "--corpus", str(corpus_dir), "--min-dice", "1.5"]) == 2


def test_threshold_flags_reach_detectors(corpus_dir, capsys):
    write_case(
        corpus_dir,
        "tiny-clones",
        {"C.java": "class C { void a(Canvas c) { c.one(1); } void b(Canvas c) { c.two(2); } }\n"},
        {"C.java": "class C { void a(Canvas c) { c.one(1, 0); } void b(Canvas c) { c.two(2, 0); } }\n"},
    )
    main(["detect", "--corpus", str(corpus_dir)])
    default_out = json.loads(capsys.readouterr().out)
    assert all(p["id"] != "copyPaste" for p in default_out[0]["patterns"])
    main(["detect", "--corpus", str(corpus_dir), "--min-clone-size", "1"])
    lowered = json.loads(capsys.readouterr().out)
    assert any(p["id"] == "copyPaste" for p in lowered[0]["patterns"])


def test_figures_rendered_alongside_output(corpus_dir, tmp_path, capsys):
    _simple_case(corpus_dir)
    figures = tmp_path / "figs"
    out_file = tmp_path / "reports.json"
    code = main(["detect", "--corpus", str(corpus_dir), "--out", str(out_file), "--figures", str(figures)])
    assert code == 0
    assert (figures / "pattern_counts.png").stat().st_size > 0
    counts_file = tmp_path / "counts.json"
    counts_file.write_text(json.dumps({"A": 666, "B": 33, "DC": 90, "DW": 73, "HC": 65, "HW": 24}))
    code = main(
        [
            "evaluate",
            "--corpus",
            str(corpus_dir),
            "--counts",
            str(counts_file),
            "--out",
            str(tmp_path / "eval.json"),
            "--figures",
            str(figures),
        ]
    )
    assert code == 0
    assert (figures / "oracle_comparison.png").stat().st_size > 0


def test_jobs_flag_keeps_output_identical(corpus_dir, capsys):
    for i in range(4):
        _simple_case(corpus_dir, f"case{i}")
    main(["detect", "--corpus", str(corpus_dir), "--jobs", "1"])
    serial = capsys.readouterr().out
    main(["detect", "--corpus", str(corpus_dir), "--jobs", "4"])
    parallel = capsys.readouterr().out
    assert serial == parallel
