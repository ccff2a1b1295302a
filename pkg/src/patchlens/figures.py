"""Summary figures rendered next to report files.

Static charts only: per-pattern instance counts for a detection run and the
per-pattern agreement breakdown for an oracle comparison.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import OracleComparison, PatchReport
from .patterns import PatternId


def render_pattern_counts(reports: list[PatchReport], out_path: Path) -> Path:
    """Bar chart: number of cases carrying each detected pattern id."""
    counts = {pid.value: 0 for pid in PatternId}
    for report in reports:
        for pid in report.pattern_ids():
            counts[pid.value] += 1
    labels = [name for name, count in counts.items() if count > 0]
    values = [counts[name] for name in labels]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(labels) + 2.0), 4.0))
    ax.bar(range(len(labels)), values, color="#4c72b0")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("cases with pattern")
    ax.set_title(f"Detected repair patterns across {len(reports)} cases")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_oracle_comparison(comparison: OracleComparison, out_path: Path) -> Path:
    """Grouped bars: agreements vs detector-only vs oracle-only per pattern."""
    patterns = sorted(comparison.per_pattern, key=lambda p: p.value)
    labels = [p.value for p in patterns]
    agree = [comparison.per_pattern[p].agree for p in patterns]
    detector_only = [comparison.per_pattern[p].detector_only for p in patterns]
    oracle_only = [comparison.per_pattern[p].oracle_only for p in patterns]
    width = 0.28
    xs = range(len(labels))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(labels) + 2.0), 4.0))
    ax.bar([x - width for x in xs], agree, width, label="agree", color="#55a868")
    ax.bar(list(xs), detector_only, width, label="detector only", color="#c44e52")
    ax.bar([x + width for x in xs], oracle_only, width, label="oracle only", color="#8172b2")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("patches")
    ax.set_title("Detection vs oracle annotations")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
