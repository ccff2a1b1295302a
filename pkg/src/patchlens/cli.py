"""Command-line interface.

Commands::

    patchlens detect   --corpus DIR [--out FILE] [--figures DIR] ...
    patchlens diff     --corpus DIR [--case GLOB] [--out FILE]
    patchlens evaluate --corpus DIR [--counts FILE] [--out FILE] [--figures DIR]

Exit status: 0 on success, 1 when any case failed to analyze, 2 on
configuration errors (bad flags, missing corpus, unreadable counts file).
With ``--format json`` the primary output stream carries only JSON; all
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .differ import DiffOptions, dump_script
from .harness import (
    AnalysisOptions,
    DetectorOptions,
    DiffApplyError,
    EvaluationCounts,
    comparison_to_dict,
    compare_to_oracle,
    compute_metrics,
    find_cases,
    load_case,
    load_counts,
    load_oracle,
    metrics_to_dict,
    parse_unified_diff,
    apply_hunks,
    report_to_dict,
    reports_to_json,
    run_corpus,
)
from .parser import parse
from .patterns import DiffContext, group_of

EXIT_OK = 0
EXIT_CASE_ERRORS = 1
EXIT_CONFIG = 2


class _ConfigError(Exception):
    pass


def _color_enabled() -> bool:
    return os.environ.get("PATCHLENS_NO_COLOR") is None and sys.stdout.isatty()


def _style(text: str, code: str) -> str:
    if _color_enabled():
        return f"\033[{code}m{text}\033[0m"
    return text


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patchlens", description="AST-level patch analysis and repair-pattern detection")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--corpus", required=True, help="directory of patch cases")
        p.add_argument("--case", default=None, help="glob filter on case ids")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--min-height", type=int, default=2, help="top-down matcher subtree height floor")
        p.add_argument("--min-dice", type=float, default=0.5, help="bottom-up matcher similarity floor")
        p.add_argument("--min-clone-size", type=int, default=4, help="copy/paste clone size floor in AST nodes")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel case workers")

    detect = sub.add_parser("detect", help="analyze every case and write pattern reports")
    add_common(detect)
    detect.add_argument("--figures", default=None, help="directory for summary figures")

    diff_cmd = sub.add_parser("diff", help="write raw edit-script dumps for selected cases")
    add_common(diff_cmd)

    evaluate = sub.add_parser("evaluate", help="compare detection to oracle annotations and compute metrics")
    add_common(evaluate)
    evaluate.add_argument("--counts", default=None, help="adjudicated counts JSON file (keys A, B, DC, DW, HC, HW)")
    evaluate.add_argument("--figures", default=None, help="directory for summary figures")
    return parser


def _analysis_options(args: argparse.Namespace) -> AnalysisOptions:
    try:
        return AnalysisOptions(
            diff=DiffOptions(min_height=args.min_height, min_dice=args.min_dice),
            detector=DetectorOptions(min_clone_size=args.min_clone_size),
        )
    except ValueError as exc:
        raise _ConfigError(str(exc)) from exc


def _corpus_dir(args: argparse.Namespace) -> Path:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise _ConfigError(f"corpus directory not found: {corpus}")
    return corpus


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_errors(reports) -> int:
    failed = [r for r in reports if r.error]
    for report in failed:
        print(f"case {report.case_id}: {report.error}", file=sys.stderr)
    return EXIT_CASE_ERRORS if failed else EXIT_OK


def _figures_dir(raw: str | None) -> Path | None:
    if raw is None:
        return None
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _reports_text(reports) -> str:
    lines = [_style("case\tpattern\tgroup\tanchors\tnote", "36")]
    for report in reports:
        if report.error:
            lines.append(f"{report.case_id}\tERROR\t-\t-\t{report.error}")
            continue
        if not report.instances:
            lines.append(f"{report.case_id}\t-\t-\t-\t-")
        for inst in report.instances:
            anchors = ";".join(
                f"{a.side}:{a.span.file}:{a.span.start_line}-{a.span.end_line}" for a in inst.anchors
            )
            lines.append(
                f"{report.case_id}\t{inst.pattern_id.value}\t{group_of(inst.pattern_id).value}\t{anchors}\t{inst.note or '-'}"
            )
    return "\n".join(lines) + "\n"


def _cmd_detect(args: argparse.Namespace) -> int:
    corpus = _corpus_dir(args)
    options = _analysis_options(args)
    reports = run_corpus(corpus, args.case, options, jobs=max(args.jobs, 1))
    if args.format == "json":
        _emit(args, reports_to_json(reports))
    else:
        _emit(args, _reports_text(reports))
    figures = _figures_dir(args.figures)
    if figures is not None:
        from .figures import render_pattern_counts

        render_pattern_counts(reports, figures / "pattern_counts.png")
    return _report_errors(reports)


def _cmd_diff(args: argparse.Namespace) -> int:
    corpus = _corpus_dir(args)
    options = _analysis_options(args)
    chunks: list[str] = []
    failures = 0
    for case_dir in find_cases(corpus, args.case):
        case = load_case(case_dir)
        chunks.append(f"== case {case.case_id}\n")
        try:
            for file_diff in sorted(parse_unified_diff(case.diff_text), key=lambda f: f.path):
                path = file_diff.path
                before_text = "" if file_diff.old_path is None else case.before_files.get(file_diff.old_path, "")
                if file_diff.old_path is not None and file_diff.old_path not in case.before_files:
                    raise DiffApplyError(f"{file_diff.old_path}: named in diff but missing from before files")
                after_text = apply_hunks(before_text, file_diff.hunks) if file_diff.new_path is not None else ""
                ctx = DiffContext.build(parse(before_text, path), parse(after_text, path), options.diff)
                chunks.append(f"-- file {path}\n")
                chunks.append(dump_script(ctx.script))
        except Exception as exc:  # per-case isolation, like detect
            failures += 1
            print(f"case {case.case_id}: {exc}", file=sys.stderr)
            chunks.append(f"!! error: {exc}\n")
    _emit(args, "".join(chunks))
    return EXIT_CASE_ERRORS if failures else EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = _corpus_dir(args)
    options = _analysis_options(args)
    case_dirs = find_cases(corpus, args.case)
    reports = run_corpus(corpus, args.case, options, jobs=max(args.jobs, 1))
    oracles = [oracle for d in case_dirs if (oracle := load_oracle(d)) is not None]
    annotated_ids = {o.case_id for o in oracles}
    comparable = [r for r in reports if r.case_id in annotated_ids]
    payload: dict = {}
    comparison = None
    if oracles:
        try:
            comparison = compare_to_oracle(comparable, oracles)
        except ValueError as exc:
            raise _ConfigError(str(exc)) from exc
        payload.update(comparison_to_dict(comparison))
    if args.counts:
        counts_path = Path(args.counts)
        if not counts_path.is_file():
            raise _ConfigError(f"counts file not found: {counts_path}")
        try:
            counts = load_counts(counts_path)
        except (ValueError, json.JSONDecodeError) as exc:
            raise _ConfigError(f"bad counts file: {exc}") from exc
        payload["metrics"] = metrics_to_dict(compute_metrics(counts))
    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        _emit(args, _evaluation_text(payload))
    figures = _figures_dir(args.figures)
    if figures is not None and comparison is not None:
        from .figures import render_oracle_comparison

        render_oracle_comparison(comparison, figures / "oracle_comparison.png")
    return _report_errors(reports)


def _evaluation_text(payload: dict) -> str:
    lines = []
    if "perPattern" in payload:
        lines.append(_style("pattern\tagree\tdetectorOnly\toracleOnly", "36"))
        for name, tally in payload["perPattern"].items():
            lines.append(f"{name}\t{tally['agree']}\t{tally['detectorOnly']}\t{tally['oracleOnly']}")
        overall = payload["overall"]
        lines.append(f"overall\t{overall['agree']}\t{overall['detectorOnly']}\t{overall['oracleOnly']}")
    if "metrics" in payload:
        metrics = payload["metrics"]
        lines.append(f"tp\t{metrics['tp']}")
        lines.append(f"precision\t{metrics['precision']:.4f}")
        lines.append(f"recall\t{metrics['recall']:.4f}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    handlers = {"detect": _cmd_detect, "diff": _cmd_diff, "evaluate": _cmd_evaluate}
    try:
        return handlers[args.command](args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
