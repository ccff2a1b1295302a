"""Patch-case ingestion, analysis orchestration, reports and metrics.

A corpus is a directory of case directories, each holding::

    <case-id>/
        before/         source tree of the buggy version
        patch.diff      unified diff, paths relative to before/
        oracle.json     optional: {"caseId": ..., "expected": [pattern ids]}

Analysis reconstructs the patched files by strict hunk application, parses
both versions, diffs them, and runs the pattern detectors. Reports are
deterministic: identical corpora produce byte-identical output.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .differ import DEFAULT_OPTIONS, DiffOptions
from .parser import ParseError, parse
from .patterns import (
    DEFAULT_DETECTOR_OPTIONS,
    DetectorOptions,
    DiffContext,
    PatternId,
    PatternInstance,
    detect_copy_paste_multi,
    detect_single_line,
    finalize_instances,
    group_of,
    detect_conditional_block,
    detect_expression_fix,
    detect_wraps_unwraps,
    detect_wrong_reference,
    detect_missing_null_check,
    detect_constant_change,
    detect_code_moving,
)


class DiffApplyError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisOptions:
    diff: DiffOptions = DEFAULT_OPTIONS
    detector: DetectorOptions = DEFAULT_DETECTOR_OPTIONS


DEFAULT_ANALYSIS_OPTIONS = AnalysisOptions()


# -- unified diff parsing and strict application ---------------------------


@dataclass(frozen=True)
class HunkLine:
    tag: str  # " ", "-", "+"
    text: str


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_count: int
    new_start: int
    new_count: int
    lines: tuple[HunkLine, ...]


@dataclass(frozen=True)
class FileDiff:
    old_path: str | None  # None for created files
    new_path: str | None  # None for deleted files
    hunks: tuple[Hunk, ...]

    @property
    def path(self) -> str:
        chosen = self.new_path or self.old_path
        assert chosen is not None
        return chosen


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


def _clean_path(raw: str) -> str | None:
    path = raw.strip().split("\t")[0]
    if path == "/dev/null":
        return None
    if path.startswith(("a/", "b/")):
        path = path[2:]
    return path


def parse_unified_diff(diff_text: str) -> list[FileDiff]:
    """Split a (possibly multi-file) unified diff into per-file hunk lists."""
    files: list[FileDiff] = []
    lines = diff_text.splitlines()
    i = 0
    old_path: str | None = None
    new_path: str | None = None
    hunks: list[Hunk] = []
    in_file = False

    def flush() -> None:
        nonlocal hunks, in_file
        if in_file:
            files.append(FileDiff(old_path, new_path, tuple(hunks)))
        hunks = []
        in_file = False

    while i < len(lines):
        line = lines[i]
        if line.startswith("--- "):
            flush()
            old_path = _clean_path(line[4:])
            i += 1
            if i >= len(lines) or not lines[i].startswith("+++ "):
                raise DiffApplyError(f"diff line {i + 1}: '---' header without matching '+++'")
            new_path = _clean_path(lines[i][4:])
            if old_path is None and new_path is None:
                raise DiffApplyError(f"diff line {i + 1}: both sides are /dev/null")
            in_file = True
            i += 1
            continue
        match = _HUNK_RE.match(line)
        if match:
            if not in_file:
                raise DiffApplyError(f"diff line {i + 1}: hunk header before file header")
            old_start = int(match.group(1))
            old_count = int(match.group(2) or "1")
            new_start = int(match.group(3))
            new_count = int(match.group(4) or "1")
            i += 1
            body: list[HunkLine] = []
            seen_old = seen_new = 0
            while i < len(lines) and (seen_old < old_count or seen_new < new_count):
                raw = lines[i]
                if raw.startswith("\\"):  # "\ No newline at end of file"
                    i += 1
                    continue
                if not raw:
                    raw = " "
                tag, text = raw[0], raw[1:]
                if tag not in " -+":
                    raise DiffApplyError(f"diff line {i + 1}: unexpected hunk line {raw!r}")
                body.append(HunkLine(tag, text))
                if tag in " -":
                    seen_old += 1
                if tag in " +":
                    seen_new += 1
                i += 1
            if seen_old != old_count or seen_new != new_count:
                raise DiffApplyError(f"hunk at diff line {i + 1}: body shorter than declared counts")
            hunks.append(Hunk(old_start, old_count, new_start, new_count, tuple(body)))
            continue
        i += 1
    flush()
    return files


def apply_hunks(before: str, hunks: tuple[Hunk, ...] | list[Hunk]) -> str:
    """Strict hunk application: context must match exactly at stated offsets."""
    source = before.splitlines()
    out: list[str] = []
    cursor = 0  # index into source (0-based)
    for hunk_index, hunk in enumerate(hunks, start=1):
        start = hunk.old_start - 1
        if hunk.old_count == 0:
            # Pure insertion hunks anchor after the stated line.
            start = hunk.old_start
        if start < cursor or start > len(source):
            raise DiffApplyError(f"hunk {hunk_index}: start line {hunk.old_start} out of range or overlapping")
        out.extend(source[cursor:start])
        cursor = start
        for line in hunk.lines:
            if line.tag == "+":
                out.append(line.text)
                continue
            if cursor >= len(source):
                raise DiffApplyError(f"hunk {hunk_index}: ran past end of file at line {cursor + 1}")
            if source[cursor] != line.text:
                raise DiffApplyError(
                    f"hunk {hunk_index}: context mismatch at line {cursor + 1}: expected {line.text!r}, found {source[cursor]!r}"
                )
            if line.tag == " ":
                out.append(source[cursor])
            cursor += 1
    out.extend(source[cursor:])
    text = "\n".join(out)
    if out:
        text += "\n"
    return text


def apply_unified_diff(before: str, diff_text: str) -> str:
    """Apply a single-file unified diff to ``before`` and return the result."""
    files = parse_unified_diff(diff_text)
    if not files:
        return before
    if len(files) > 1:
        raise DiffApplyError("apply_unified_diff expects a single-file diff")
    return apply_hunks(before, files[0].hunks)


# -- cases, reports, corpus --------------------------------------------------


@dataclass(frozen=True)
class PatchCase:
    case_id: str
    before_files: dict[str, str]
    diff_text: str


@dataclass(frozen=True)
class FileChangeSummary:
    path: str
    actions: dict[str, int]


@dataclass(frozen=True)
class PatchReport:
    case_id: str
    files: tuple[FileChangeSummary, ...]
    instances: tuple[PatternInstance, ...]
    timing_ms: float
    error: str | None = None

    def pattern_ids(self) -> set[PatternId]:
        return {inst.pattern_id for inst in self.instances}


@dataclass(frozen=True)
class OracleAnnotation:
    case_id: str
    expected: frozenset[PatternId]


def analyze_patch(case: PatchCase, options: AnalysisOptions = DEFAULT_ANALYSIS_OPTIONS) -> PatchReport:
    """Reconstruct the patched files, diff each changed file, detect patterns.

    Failures (unparseable file, inapplicable hunk) are reported on the case
    itself rather than raised, so corpus runs keep going.
    """
    started = time.perf_counter()
    try:
        file_diffs = parse_unified_diff(case.diff_text)
        contexts: list[tuple[str, DiffContext]] = []
        summaries: list[FileChangeSummary] = []
        for file_diff in sorted(file_diffs, key=lambda f: f.path):
            path = file_diff.path
            if file_diff.old_path is None:
                before_text = ""
            elif file_diff.old_path in case.before_files:
                before_text = case.before_files[file_diff.old_path]
            else:
                raise DiffApplyError(f"{file_diff.old_path}: named in diff but missing from before files")
            after_text = apply_hunks(before_text, file_diff.hunks) if file_diff.new_path is not None else ""
            before_tree = parse(before_text, path)
            after_tree = parse(after_text, path)
            ctx = DiffContext.build(before_tree, after_tree, options.diff)
            contexts.append((path, ctx))
            summaries.append(FileChangeSummary(path=path, actions=ctx.script.action_counts()))
    except (ParseError, DiffApplyError) as exc:
        elapsed = (time.perf_counter() - started) * 1000.0
        return PatchReport(case.case_id, (), (), elapsed, error=str(exc))

    instances: list[PatternInstance] = []
    per_file_detectors = (
        detect_conditional_block,
        detect_expression_fix,
        detect_wraps_unwraps,
        detect_wrong_reference,
        detect_missing_null_check,
        detect_constant_change,
        detect_code_moving,
    )
    changed = [ctx for _, ctx in contexts if ctx.script]
    for _, ctx in contexts:
        if not ctx.script:
            continue
        for detector in per_file_detectors:
            instances.extend(detector(ctx))
    # Single Line is a per-patch property: it can only hold when exactly one
    # file changed. Copy/Paste sites may span files, so it runs case-wide.
    if len(changed) == 1:
        instances.extend(detect_single_line(changed[0]))
    instances.extend(detect_copy_paste_multi(changed, options.detector))
    elapsed = (time.perf_counter() - started) * 1000.0
    return PatchReport(case.case_id, tuple(summaries), tuple(finalize_instances(instances)), elapsed)


def load_case(case_dir: Path) -> PatchCase:
    before_dir = case_dir / "before"
    before_files: dict[str, str] = {}
    if before_dir.is_dir():
        for path in sorted(before_dir.rglob("*")):
            if path.is_file():
                before_files[path.relative_to(before_dir).as_posix()] = path.read_text(encoding="utf-8")
    diff_path = case_dir / "patch.diff"
    diff_text = diff_path.read_text(encoding="utf-8") if diff_path.is_file() else ""
    return PatchCase(case_id=case_dir.name, before_files=before_files, diff_text=diff_text)


def load_oracle(case_dir: Path) -> OracleAnnotation | None:
    oracle_path = case_dir / "oracle.json"
    if not oracle_path.is_file():
        return None
    data = json.loads(oracle_path.read_text(encoding="utf-8"))
    expected = frozenset(PatternId(value) for value in data.get("expected", []))
    return OracleAnnotation(case_id=data.get("caseId", case_dir.name), expected=expected)


def find_cases(corpus_dir: Path, case_filter: str | None = None) -> list[Path]:
    from fnmatch import fnmatch

    cases = [p for p in sorted(corpus_dir.iterdir()) if p.is_dir() and (p / "patch.diff").is_file()]
    if case_filter:
        cases = [p for p in cases if fnmatch(p.name, case_filter)]
    return cases


def run_corpus(
    corpus_dir: Path,
    case_filter: str | None = None,
    options: AnalysisOptions = DEFAULT_ANALYSIS_OPTIONS,
    jobs: int = 1,
) -> list[PatchReport]:
    """Analyze every case under ``corpus_dir``, ordered by case id."""
    case_dirs = find_cases(corpus_dir, case_filter)
    cases = [load_case(d) for d in case_dirs]
    if jobs > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda c: analyze_patch(c, options), cases))
    else:
        reports = [analyze_patch(c, options) for c in cases]
    reports.sort(key=lambda r: r.case_id)
    return reports


# -- oracle comparison and metrics ------------------------------------------


@dataclass(frozen=True)
class PatternTally:
    agree: int = 0
    detector_only: int = 0
    oracle_only: int = 0


@dataclass(frozen=True)
class CaseDelta:
    case_id: str
    detector_only: tuple[PatternId, ...]
    oracle_only: tuple[PatternId, ...]


@dataclass(frozen=True)
class OracleComparison:
    per_pattern: dict[PatternId, PatternTally]
    overall: PatternTally
    cases: tuple[CaseDelta, ...]


def compare_to_oracle(reports: list[PatchReport], oracles: list[OracleAnnotation]) -> OracleComparison:
    """Instance-level agreement between detection and oracle annotations.

    Presence is counted per patch and per pattern id; an agreement is both
    sides carrying the id. The detector-only/oracle-only splits are the raw
    material for a human adjudication pass, which stays outside this tool.
    """
    oracle_by_case = {o.case_id: o for o in oracles}
    if len(oracle_by_case) != len(oracles):
        raise ValueError("duplicate case ids among oracle annotations")
    report_ids = [r.case_id for r in reports]
    if len(set(report_ids)) != len(report_ids):
        raise ValueError("duplicate case ids among reports")
    unknown = [r.case_id for r in reports if r.case_id not in oracle_by_case]
    if unknown:
        raise ValueError(f"no oracle annotation for case(s): {', '.join(sorted(unknown))}")
    missing = sorted(set(oracle_by_case) - set(report_ids))
    if missing:
        raise ValueError(f"no report for annotated case(s): {', '.join(missing)}")

    agree: dict[PatternId, int] = {pid: 0 for pid in PatternId}
    detector_only: dict[PatternId, int] = {pid: 0 for pid in PatternId}
    oracle_only: dict[PatternId, int] = {pid: 0 for pid in PatternId}
    deltas: list[CaseDelta] = []
    for report in sorted(reports, key=lambda r: r.case_id):
        detected = report.pattern_ids()
        expected = oracle_by_case[report.case_id].expected
        for pid in detected & expected:
            agree[pid] += 1
        d_only = tuple(sorted(detected - expected, key=lambda p: p.value))
        o_only = tuple(sorted(expected - detected, key=lambda p: p.value))
        for pid in d_only:
            detector_only[pid] += 1
        for pid in o_only:
            oracle_only[pid] += 1
        if d_only or o_only:
            deltas.append(CaseDelta(report.case_id, d_only, o_only))

    per_pattern = {
        pid: PatternTally(agree[pid], detector_only[pid], oracle_only[pid])
        for pid in PatternId
        if agree[pid] or detector_only[pid] or oracle_only[pid]
    }
    overall = PatternTally(sum(agree.values()), sum(detector_only.values()), sum(oracle_only.values()))
    return OracleComparison(per_pattern=per_pattern, overall=overall, cases=tuple(deltas))


@dataclass(frozen=True)
class EvaluationCounts:
    """Adjudicated disagreement counts feeding precision/recall.

    agreements (A), both_acceptable (B), detector_correct (DC),
    detector_wrong (DW), human_correct (HC); human_wrong (HW) is tracked for
    completeness but does not enter the formulas.
    """

    agreements: int
    both_acceptable: int
    detector_correct: int
    detector_wrong: int
    human_correct: int
    human_wrong: int = 0

    def __post_init__(self) -> None:
        for name in ("agreements", "both_acceptable", "detector_correct", "detector_wrong", "human_correct", "human_wrong"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    precision: float
    recall: float


def compute_metrics(counts: EvaluationCounts) -> MetricsReport:
    """True positives and precision/recall from adjudicated counts.

    tp = A + B + DC; precision = tp / (tp + DW); recall = tp / (tp + HC).
    A zero denominator (possible only when tp is also zero) yields 1.0.
    """
    tp = counts.agreements + counts.both_acceptable + counts.detector_correct
    precision = tp / (tp + counts.detector_wrong) if (tp + counts.detector_wrong) > 0 else 1.0
    recall = tp / (tp + counts.human_correct) if (tp + counts.human_correct) > 0 else 1.0
    return MetricsReport(tp=tp, precision=precision, recall=recall)


def load_counts(path: Path) -> EvaluationCounts:
    """Read an adjudication counts file: {"A": n, "B": n, "DC": n, "DW": n, "HC": n, "HW": n}."""
    data = json.loads(path.read_text(encoding="utf-8"))
    try:
        return EvaluationCounts(
            agreements=int(data["A"]),
            both_acceptable=int(data["B"]),
            detector_correct=int(data["DC"]),
            detector_wrong=int(data["DW"]),
            human_correct=int(data["HC"]),
            human_wrong=int(data.get("HW", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"counts file missing key {exc}") from exc


# -- serialization -----------------------------------------------------------


def instance_to_dict(inst: PatternInstance) -> dict:
    payload = {
        "id": inst.pattern_id.value,
        "group": group_of(inst.pattern_id).value,
        "anchors": [
            {"file": a.span.file, "side": a.side, "startLine": a.span.start_line, "endLine": a.span.end_line}
            for a in inst.anchors
        ],
    }
    if inst.note:
        payload["note"] = inst.note
    return payload


def report_to_dict(report: PatchReport) -> dict:
    # timing is intentionally left out: report files must be byte-identical
    # across runs on the same corpus.
    payload = {
        "caseId": report.case_id,
        "files": [{"path": s.path, "actions": s.actions} for s in report.files],
        "patterns": [instance_to_dict(i) for i in report.instances],
    }
    if report.error is not None:
        payload["error"] = report.error
    return payload


def reports_to_json(reports: list[PatchReport]) -> str:
    return json.dumps([report_to_dict(r) for r in reports], indent=2, sort_keys=True) + "\n"


def comparison_to_dict(comparison: OracleComparison) -> dict:
    return {
        "perPattern": {
            pid.value: {"agree": tally.agree, "detectorOnly": tally.detector_only, "oracleOnly": tally.oracle_only}
            for pid, tally in sorted(comparison.per_pattern.items(), key=lambda kv: kv[0].value)
        },
        "overall": {
            "agree": comparison.overall.agree,
            "detectorOnly": comparison.overall.detector_only,
            "oracleOnly": comparison.overall.oracle_only,
        },
        "cases": [
            {
                "caseId": delta.case_id,
                "detectorOnly": [p.value for p in delta.detector_only],
                "oracleOnly": [p.value for p in delta.oracle_only],
            }
            for delta in comparison.cases
        ],
    }


def metrics_to_dict(metrics: MetricsReport) -> dict:
    return {"tp": metrics.tp, "precision": round(metrics.precision, 4), "recall": round(metrics.recall, 4)}
