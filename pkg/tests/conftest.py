"""Shared test fixtures: corpus materialization and patch synthesis."""

from __future__ import annotations

import difflib
import json
from pathlib import Path

import pytest


def make_patch(before: dict[str, str], after: dict[str, str]) -> str:
    """Unified diff covering every file that differs between the two sides."""
    chunks: list[str] = []
    for path in sorted(set(before) | set(after)):
        b = before.get(path)
        a = after.get(path)
        if b == a:
            continue
        fromfile = f"a/{path}" if b is not None else "/dev/null"
        tofile = f"b/{path}" if a is not None else "/dev/null"
        diff = difflib.unified_diff(
            (b or "").splitlines(),
            (a or "").splitlines(),
            fromfile=fromfile,
            tofile=tofile,
            lineterm="",
        )
        text = "\n".join(diff)
        if text:
            chunks.append(text + "\n")
    return "".join(chunks)


def write_case(
    corpus_dir: Path,
    case_id: str,
    before: dict[str, str],
    after: dict[str, str],
    expected: list[str] | None = None,
) -> Path:
    case_dir = corpus_dir / case_id
    before_dir = case_dir / "before"
    for path, text in before.items():
        target = before_dir / path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    case_dir.mkdir(parents=True, exist_ok=True)
    (case_dir / "patch.diff").write_text(make_patch(before, after), encoding="utf-8")
    if expected is not None:
        (case_dir / "oracle.json").write_text(
            json.dumps({"caseId": case_id, "expected": sorted(expected)}, indent=2) + "\n", encoding="utf-8"
        )
    return case_dir


@pytest.fixture()
def corpus_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "corpus"
    directory.mkdir()
    return directory
