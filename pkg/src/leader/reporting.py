"""Rendering metric reports: text table, CSV, and summary figures."""

from __future__ import annotations

import csv
from pathlib import Path

from leader.metrics import MetricsReport

TABLE_COLUMNS = ("program", "cor", "rob", "hs", "size", "mem", "atk")


def _row(r: MetricsReport) -> tuple[str, ...]:
    return (
        r.program,
        f"{r.correctness:.3f}",
        f"{r.robustness:.3f}",
        f"{r.harmonized:.3f}",
        f"{r.size_reduction:.3f}",
        f"{r.mem_reduction:.3f}",
        f"{r.atk_reduction:.3f}",
    )


def format_table(reports: list[MetricsReport]) -> str:
    """Aligned text table; reduction columns are fractions of the original."""
    rows = [TABLE_COLUMNS] + [_row(r) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def write_csv(reports: list[MetricsReport], path: Path):
    fields = list(MetricsReport.__dataclass_fields__)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for r in reports:
            writer.writerow(r.to_json())


def render_figures(reports: list[MetricsReport], outdir: Path) -> list[Path]:
    """Bar charts for behavior scores and for reductions; returns paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    names = [r.program for r in reports]
    xs = range(len(reports))
    width = 0.27
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(reports)), 4))
    for k, (label, values) in enumerate(
        (
            ("correctness", [r.correctness for r in reports]),
            ("robustness", [r.robustness for r in reports]),
            ("harmonized", [r.harmonized for r in reports]),
        )
    ):
        ax.bar([x + (k - 1) * width for x in xs], values, width, label=label)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend()
    fig.tight_layout()
    path = outdir / "scores.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(reports)), 4))
    for k, (label, values) in enumerate(
        (
            ("size", [r.size_reduction for r in reports]),
            ("memory", [r.mem_reduction for r in reports]),
            ("attack surface", [r.atk_reduction for r in reports]),
        )
    ):
        ax.bar([x + (k - 1) * width for x in xs], values, width, label=label)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("reduction")
    ax.legend()
    fig.tight_layout()
    path = outdir / "reductions.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    return written
