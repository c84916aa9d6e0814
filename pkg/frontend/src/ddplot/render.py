"""Render fidelity-loss-vs-slot-count figures from ddkit scan tables.

The input is the published 11-column CSV schema; no statistics are computed
here beyond reading it. Each non-envelope family becomes one log-log curve
through its (n_slots, mean_loss) points, one marker per (family, order) row;
the envelope family becomes a shaded band between its min and max columns
with a dashed mean line.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_COLUMNS = [
    "family",
    "order",
    "sequence",
    "n_slots",
    "duration_s",
    "mean_loss",
    "std_loss",
    "min_loss",
    "max_loss",
    "n_ok",
    "n_excluded",
]

ENVELOPE_FAMILY = "owdd_class_envelope"

FAMILY_STYLE = {
    "cdd": dict(color="#d62728", marker="s"),
    "owdd_h": dict(color="#1f77b4", marker="o"),
    "owdd_l": dict(color="#2ca02c", marker="^"),
    ENVELOPE_FAMILY: dict(color="#9467bd", marker="."),
}


class SchemaError(ValueError):
    """The CSV does not carry the published scan-table schema."""

    def __init__(self, column: str, message: str):
        self.column = column
        super().__init__(message)


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: input table, output image, family/shading choices."""

    csv_path: str
    out_path: str
    families: tuple[str, ...] | None = None
    envelope: bool = True


@dataclass(frozen=True)
class ScanRow:
    family: str
    order: int
    sequence: str
    n_slots: int
    mean_loss: float
    min_loss: float
    max_loss: float


def load_table(csv_path: str) -> list[ScanRow]:
    """Read and validate a scan table, reporting schema gaps by column name."""
    with open(csv_path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in CSV_COLUMNS:
            if column not in header:
                raise SchemaError(column, f"{csv_path}: missing column '{column}'")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                rows.append(
                    ScanRow(
                        family=raw["family"],
                        order=int(raw["order"]),
                        sequence=raw["sequence"],
                        n_slots=int(raw["n_slots"]),
                        mean_loss=float(raw["mean_loss"]),
                        min_loss=float(raw["min_loss"]),
                        max_loss=float(raw["max_loss"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise SchemaError(
                    "row", f"{csv_path}: line {lineno}: unparsable row ({exc})"
                ) from exc
    return rows


def build_figure(rows, families=None, envelope: bool = True):
    """Assemble the matplotlib figure; separated from file I/O for testing."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    present = []
    for row in rows:
        if row.family not in present:
            present.append(row.family)
    selected = [f for f in present if families is None or f in families]

    for family in selected:
        pts = sorted(
            (r for r in rows if r.family == family), key=lambda r: (r.n_slots, r.order)
        )
        x = [r.n_slots for r in pts]
        style = FAMILY_STYLE.get(family, {})
        if family == ENVELOPE_FAMILY:
            if envelope:
                ax.fill_between(
                    x,
                    [r.min_loss for r in pts],
                    [r.max_loss for r in pts],
                    alpha=0.25,
                    color=style.get("color"),
                    label=f"{family} spread",
                )
            ax.plot(
                x,
                [r.mean_loss for r in pts],
                linestyle="--",
                linewidth=1.0,
                **style,
                label=f"{family} mean",
            )
        else:
            ax.plot(x, [r.mean_loss for r in pts], label=family, **style)

    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("number of control time slots")
    ax.set_ylabel("fidelity loss")
    if selected:
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    return fig, ax


def render(spec: PlotSpec) -> str:
    """Render one table to an image file and return the output path."""
    rows = load_table(spec.csv_path)
    fig, _ = build_figure(rows, families=spec.families, envelope=spec.envelope)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return spec.out_path
