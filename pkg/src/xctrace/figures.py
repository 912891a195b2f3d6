"""Optional matplotlib renderings of the CLI's tabular outputs.

Everything here is additive: the delimited outputs are the interface, these
are pictures of the same rows. Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

logger = logging.getLogger(__name__)

_BAR_COLOR = "#4878a8"
_LINE_COLOR = "#4878a8"
_FIT_COLOR = "#c44e52"


def save_figure(fig, target: str | Path) -> Path:
    target = Path(target)
    if target.parent != Path(""):
        target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=120, bbox_inches="tight")
    plt.close(fig)
    logger.info("wrote figure %s", target)
    return target


def bar_figure(
    centers: Sequence[float],
    counts: Sequence[float],
    *,
    xlabel: str,
    title: str,
    ylabel: str = "count",
    fit_curve: Sequence[float] | None = None,
    fit_label: str = "power-law fit",
):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    width = (centers[1] - centers[0]) * 0.9 if len(centers) > 1 else 0.8
    ax.bar(centers, counts, width=width, color=_BAR_COLOR, label="observed")
    if fit_curve is not None:
        ax.plot(centers, fit_curve, color=_FIT_COLOR, lw=2, label=fit_label)
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return fig


def line_figure(
    x: Sequence[float],
    y: Sequence[float],
    *,
    xlabel: str,
    ylabel: str,
    title: str,
    ylim: tuple[float, float] | None = None,
    hline: float | None = None,
    hline_label: str | None = None,
):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, y, marker="o", color=_LINE_COLOR)
    if hline is not None:
        ax.axhline(hline, color=_FIT_COLOR, ls="--", label=hline_label)
        if hline_label:
            ax.legend()
    if ylim is not None:
        ax.set_ylim(*ylim)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return fig
