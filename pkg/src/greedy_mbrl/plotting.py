"""Regret curves with +-3 std bands, rendered to a self-contained SVG."""
from __future__ import annotations

import csv
import io
from typing import Mapping

import numpy as np

SVG_SALT = "greedy-mbrl"
REQUIRED = ("episode", "regret_cum_mean", "regret_cum_std")


class CsvFormatError(ValueError):
    pass


class EmptyPlotError(ValueError):
    pass


def read_aggregate(text: str) -> dict[str, np.ndarray]:
    """Parse an aggregate CSV into ``episode``, ``mean`` and ``std`` columns."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyPlotError("empty series") from None
    missing = [name for name in REQUIRED if name not in header]
    if missing:
        raise CsvFormatError(f"line 1: missing columns {missing}")
    cols = [header.index(name) for name in REQUIRED]
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        try:
            rows.append([float(row[c]) for c in cols])
        except ValueError:
            raise CsvFormatError(f"line {line_no}: non-numeric field") from None
    if not rows:
        raise EmptyPlotError("empty series")
    data = np.array(rows)
    return {"episode": data[:, 0], "mean": data[:, 1], "std": data[:, 2]}


def emit_plot(series: Mapping[str, str], title: str = "") -> str:
    """SVG of cumulative regret per episode, one curve per entry of ``series``.

    ``series`` maps a label (usually the agent name) to aggregate-CSV text.
    Output is byte-stable for identical input.
    """
    if not series:
        raise EmptyPlotError("no series to plot")
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib.figure import Figure

    parsed = {label: read_aggregate(text) for label, text in series.items()}
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(6, 4))
        ax = fig.add_subplot()
        for label, d in parsed.items():
            (line,) = ax.plot(d["episode"], d["mean"], label=label, lw=1.2)
            ax.fill_between(
                d["episode"], d["mean"] - 3 * d["std"], d["mean"] + 3 * d["std"],
                color=line.get_color(), alpha=0.2, lw=0,
            )
        ax.set_xlabel("episode")
        ax.set_ylabel("cumulative regret")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper left")
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()
