"""Deterministic run reports: key/value summaries, CSV tables, PNG figures.

Summaries and tables are byte-identical across reruns with equal inputs:
floats print with %.17g (round-trip exact), field order is fixed by the
caller, rows are newline-terminated with no trailing spaces.  Figures are
rendered with the Agg backend for unattended runs; image bytes may vary
across library versions and carry no data not already in the CSV.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence, Tuple

TABLE_COLUMNS = ("n", "exact_distance", "bound_value", "margin")


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_summary(fields: Sequence[Tuple[str, object]]) -> str:
    lines = [f"{key} = {format_value(value)}" for key, value in fields]
    return "\n".join(lines) + "\n"


def write_summary(path, fields: Sequence[Tuple[str, object]]) -> str:
    text = render_summary(fields)
    Path(path).write_text(text, encoding="utf-8")
    return text

def write_table(path, rows: Iterable[Tuple[int, float, float, float]]) -> None:
    """Rows of (n, exact_distance, bound_value, margin), exactly these columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for n, exact, bound, margin in rows:
            writer.writerow(
                [int(n), format(exact, ".17g"), format(bound, ".17g"), format(margin, ".17g")]
            )


def _log10_or_nan(x: float) -> float:
    return math.log10(x) if x > 0.0 and math.isfinite(x) else float("nan")


def render_comparison_figure(path, ns, exact, bound_log10, title: str) -> None:
    """Exact curve against the certified envelope, both on a log10 axis.

    The envelope is passed already in log10 because certified coefficients
    can exceed float range linearly.
    """
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(ns, [_log10_or_nan(e) for e in exact], label="exact", lw=1.6)
    ax.plot(ns, bound_log10, label="certified bound", lw=1.6, ls="--")
    ax.set_xlabel("n")
    ax.set_ylabel("log10 value")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_envelope_figure(path, ns, bound_log10, title: str) -> None:
    """The certified envelope alone, for runs with no exact curve to compare."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(ns, bound_log10, label="certified bound", lw=1.6, ls="--")
    ax.set_xlabel("n")
    ax.set_ylabel("log10 value")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_histogram_figure(path, counts, title: str) -> None:
    """Histogram of simulated stopping times from a bincount vector."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    import numpy as np

    counts = np.asarray(counts)
    top = int(np.nonzero(counts)[0].max()) if counts.any() else 1
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.bar(range(top + 1), counts[: top + 1], width=0.9)
    ax.set_xlabel("stopping time")
    ax.set_ylabel("replications")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
