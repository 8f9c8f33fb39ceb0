"""
SVG figures for experiment runs.

Figures are drawn on a bare ``matplotlib.figure.Figure`` (no pyplot state)
and saved with a fixed hash salt and no date, so the same data gives the
same bytes.
"""

from pathlib import Path
from typing import Dict, Optional, Sequence

import matplotlib
from matplotlib.figure import Figure

from core.artifacts import Artifact, record
from core.exceptions import ArtifactError

_STYLE = {"svg.hashsalt": "threewave", "svg.fonttype": "none"}


def _save(fig: Figure, path: Path) -> Artifact:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}") from e
    return record(path)


def line_plot(
    path: Path,
    x: Sequence[float],
    series: Dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: Optional[str] = None,
    logy: bool = False,
) -> Artifact:
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(6.4, 4.0))
        ax = fig.add_subplot()
        for label, y in series.items():
            ax.plot(x, y, label=label, linewidth=1.2)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def scatter_plot(
    path: Path,
    x: Sequence[float],
    y: Sequence[float],
    xlabel: str,
    ylabel: str,
    title: Optional[str] = None,
) -> Artifact:
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(6.4, 4.0))
        ax = fig.add_subplot()
        ax.scatter(x, y, s=6)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
