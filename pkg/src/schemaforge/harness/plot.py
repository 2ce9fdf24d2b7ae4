"""Deterministic SVG line plots from harness CSV files."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CSV_HEADER = "# schema-forge v1"


class PlotError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: tuple[str, ...]
    out: Path
    where: tuple[tuple[str, str], ...] = ()
    series: str | None = None
    title: str = ""
    labels: dict = field(default_factory=dict)


def read_csv(path) -> tuple[list[str], list[dict[str, str]]]:
    """Rows of a harness CSV; ``#`` comment lines are skipped."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    rows = list(reader)
    return list(reader.fieldnames or []), rows


def emit_plot(csv_path, spec: PlotSpec) -> Path:
    """Write one polyline per (y column, series value), axes named after columns.

    Output bytes depend only on the data: the SVG hash salt is fixed and the
    date metadata is dropped.
    """
    columns, rows = read_csv(csv_path)
    for col in (spec.x, *spec.y, *(c for c, _ in spec.where), *([spec.series] if spec.series else [])):
        if col not in columns:
            raise PlotError(f"unknown column {col!r}; available: {columns}")
    rows = [r for r in rows if all(r[c] == v for c, v in spec.where)]
    rows = [r for r in rows if all(r[c] != "" for c in (spec.x, *spec.y))]
    if not rows:
        raise PlotError("no data rows to plot")
    groups: dict[str, list[dict]] = {}
    for r in rows:
        groups.setdefault(r[spec.series] if spec.series else "", []).append(r)
    with plt.rc_context({"svg.hashsalt": "schemaforge", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for key in sorted(groups):
            pts = sorted(groups[key], key=lambda r: _num(r[spec.x]))
            xs = [_num(r[spec.x]) for r in pts]
            for col in spec.y:
                label = col if not key else f"{col} {key}"
                ax.plot(xs, [_num(r[col]) for r in pts], marker="o", markersize=3,
                        label=spec.labels.get(label, label))
        ax.set_xlabel(spec.x)
        ax.set_ylabel(", ".join(spec.y))
        if spec.title:
            ax.set_title(spec.title)
        if len(groups) * len(spec.y) > 1:
            ax.legend(fontsize="small")
        out = Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out


def _num(text: str) -> float:
    if "/" in text:
        a, b = text.split("/")
        return int(a) / int(b)
    return float(text)
