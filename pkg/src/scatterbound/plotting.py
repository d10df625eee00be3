"""Optional figure output for CLI tables.  Requires matplotlib."""

from __future__ import annotations

import math
from collections.abc import Sequence

from .errors import InputError

__all__ = ["plot_table"]


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise InputError("--plot needs matplotlib (pip install matplotlib)") from exc
    return plt


def _numeric(v) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        return math.nan
    return x


def plot_table(
    columns: Sequence[str],
    rows: Sequence[Sequence],
    path: str,
    x: str,
    ys: Sequence[str],
    group: str | None = None,
    title: str = "",
    logx: bool = False,
) -> None:
    """Line plot of ``ys`` against ``x``; rows are split into series by ``group``."""
    plt = _pyplot()
    idx = {c: i for i, c in enumerate(columns)}
    fig, ax = plt.subplots(figsize=(6.4, 4.2), constrained_layout=True)
    if group is None:
        xs = [_numeric(r[idx[x]]) for r in rows]
        for y in ys:
            ax.plot(xs, [_numeric(r[idx[y]]) for r in rows], marker=".", label=y)
    else:
        keys = list(dict.fromkeys(r[idx[group]] for r in rows))
        y = ys[0]
        for key in keys:
            sel = [r for r in rows if r[idx[group]] == key]
            ax.plot([_numeric(r[idx[x]]) for r in sel], [_numeric(r[idx[y]]) for r in sel], marker=".", label=str(key))
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(ys[0] if len(ys) == 1 or group else "value")
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150)
    plt.close(fig)
