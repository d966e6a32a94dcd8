"""Figures for scenario reports: a protocol timeline and an accountability chart."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .scenario import ScenarioReport  # noqa: E402

_STEP_COLOURS = {
    "tick": "0.75",
    "assert_fact": "tab:purple",
    "demand": "tab:blue",
    "deliver": "tab:green",
    "control": "tab:orange",
    "suspect": "tab:red",
}

# fixed metadata keeps the PNG bytes stable between runs
_PNG_META = {"Software": None}


def timeline(rep: ScenarioReport, ax=None):
    """Ledger entries and protocol steps against tick time."""
    if ax is None:
        _, ax = plt.subplots(figsize=(8, 3))
    t = 0
    xs, ys, colours, labels = [], [], [], []
    kinds = list(_STEP_COLOURS)
    for o in rep.outcomes:
        if o.kind == "tick":
            t = int(o.summary.split()[-1])
        xs.append(t)
        ys.append(kinds.index(o.kind))
        colours.append(_STEP_COLOURS[o.kind])
        labels.append(o.summary)
    ax.scatter(xs, ys, c=colours, s=40, zorder=3)
    for i, a in rep.alerts:
        ax.axvline(xs[i], color="tab:red", ls="--", lw=1)
        ax.annotate(f"alert: {len(a.claims)} claim(s)", (xs[i], ys[i]), xytext=(4, 6), textcoords="offset points", fontsize=8)
    ax.set_yticks(range(len(kinds)))
    ax.set_yticklabels(kinds)
    ax.set_xlabel("time (ticks)")
    ax.set_title(f"{rep.scenario}: protocol steps")
    ax.grid(axis="x", alpha=0.3)
    return ax


def accountability(rep: ScenarioReport, ax=None):
    """How many requirement claims each authority is accountable for."""
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 3))
    counts = Counter(who for _, _, who in rep.accountability())
    names = sorted(counts)
    suspicious = {c.accountable for _, a in rep.alerts for c in a.claims}
    ax.barh(names, [counts[n] for n in names], color=["tab:red" if n in suspicious else "tab:blue" for n in names])
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel("claims accounted for")
    ax.set_title("accountability (red: holds a suspicious claim)")
    ax.invert_yaxis()
    return ax


def render(rep: ScenarioReport, out_dir: Union[str, Path]) -> List[Path]:
    """Write ``timeline.png`` and ``accountability.png`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, draw in (("timeline", timeline), ("accountability", accountability)):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        draw(rep, ax)
        fig.tight_layout()
        path = out / f"{name}.png"
        fig.savefig(path, dpi=120, metadata=_PNG_META)
        plt.close(fig)
        paths.append(path)
    return paths
