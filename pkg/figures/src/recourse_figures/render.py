"""Turn experiment report CSVs into recovery and runtime figures.

The input is the ``recourse-costs experiment`` report: one row per
(trial, budget) measurement with the header

    trial,num_features,recourse_size,total_comparisons,
    comparisons_per_feature,mse,runtime_ms,converged

Each figure kind draws one line per group (catalog size for pairwise kinds,
recourse size for recourse kinds); the plotted y values are exactly the
per-budget means over trials, nothing is smoothed or re-derived.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

EXPERIMENT_FIELDS = (
    "trial",
    "num_features",
    "recourse_size",
    "total_comparisons",
    "comparisons_per_feature",
    "mse",
    "runtime_ms",
    "converged",
)

# kind -> (group column, group legend prefix, x column, y column, x label, y label)
KINDS = {
    "mse-pairwise": (
        "num_features",
        "|F| = ",
        "comparisons_per_feature",
        "mse",
        "comparisons per feature",
        "mean centered MSE",
    ),
    "runtime-pairwise": (
        "num_features",
        "|F| = ",
        "comparisons_per_feature",
        "runtime_ms",
        "comparisons per feature",
        "mean fit time (ms)",
    ),
    "mse-recourse": (
        "recourse_size",
        "size = ",
        "total_comparisons",
        "mse",
        "total comparisons",
        "mean centered MSE",
    ),
    "runtime-recourse": (
        "recourse_size",
        "size = ",
        "total_comparisons",
        "runtime_ms",
        "total comparisons",
        "mean fit time (ms)",
    ),
}


class SchemaError(ValueError):
    """The input file does not match the experiment report schema."""

    def __init__(self, path: Path | str, line: int | str, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    kind: str
    output: Path

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {sorted(KINDS)}")


def read_report(path: Path | str) -> list[dict]:
    """Parse and type-check the report rows, complaining with line numbers."""
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, 1, "missing header") from None
        if header != list(EXPERIMENT_FIELDS):
            raise SchemaError(
                path, 1, f"expected header {','.join(EXPERIMENT_FIELDS)!r}, got {','.join(header)!r}"
            )
        for line, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(EXPERIMENT_FIELDS):
                raise SchemaError(path, line, f"expected {len(EXPERIMENT_FIELDS)} columns")
            row = dict(zip(EXPERIMENT_FIELDS, cells))
            try:
                typed = {
                    "trial": int(row["trial"]),
                    "num_features": int(row["num_features"]),
                    "recourse_size": int(row["recourse_size"]),
                    "total_comparisons": int(row["total_comparisons"]),
                    "comparisons_per_feature": float(row["comparisons_per_feature"]),
                    "mse": float(row["mse"]),
                    "runtime_ms": float(row["runtime_ms"]),
                }
            except ValueError as exc:
                raise SchemaError(path, line, str(exc)) from None
            if row["converged"] not in ("true", "false"):
                raise SchemaError(path, line, f"converged must be true/false, got {row['converged']!r}")
            typed["converged"] = row["converged"] == "true"
            rows.append(typed)
    return rows


def aggregate(rows: list[dict], kind: str) -> dict[int, tuple[list[float], list[float]]]:
    """Per-group (x, mean-y) polylines, x ascending; means are plain sum/len."""
    group_col, _, x_col, y_col, _, _ = KINDS[kind]
    buckets: dict[tuple[int, float], list[float]] = {}
    for row in rows:
        buckets.setdefault((row[group_col], row[x_col]), []).append(row[y_col])
    lines: dict[int, tuple[list[float], list[float]]] = {}
    for group in sorted({g for g, _ in buckets}):
        xs = sorted(x for g, x in buckets if g == group)
        ys = [sum(buckets[(group, x)]) / len(buckets[(group, x)]) for x in xs]
        lines[group] = (xs, ys)
    return lines


def render(spec: FigureSpec) -> Figure:
    """Write the figure image and return the figure for inspection."""
    rows = read_report(spec.input_csv)
    if not rows:
        raise SchemaError(spec.input_csv, 2, "no data rows to plot")
    _, prefix, _, _, x_label, y_label = KINDS[spec.kind]
    lines = aggregate(rows, spec.kind)

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for group, (xs, ys) in lines.items():
        ax.plot(xs, ys, marker="o", label=f"{prefix}{group}")
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output)
    return fig
