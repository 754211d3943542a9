"""
SVG pictures of landscapes and fitted stars, drawn with matplotlib's object
API (no pyplot state, so grids rendered from worker threads do not clash).
The SVG writer gets a fixed hash salt and no date, so identical inputs give
identical bytes.
"""
import io
from typing import List, Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Polygon

from starfan.core.fan import Fan
from starfan.core.star import star_polygon
from starfan.data.models import LabeledDataset

FIGSIZE = (6.0, 5.0)
CMAP = "viridis"
LABEL_COLORS = {0: "#1f77b4", 1: "#d62728"}
SVG_RC = {"svg.hashsalt": "starfan", "svg.fonttype": "none"}


def figure_svg(fig: Figure) -> str:
    buffer = io.StringIO()
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def _cell_edges(axis: np.ndarray) -> np.ndarray:
    if len(axis) == 1:
        return np.array([axis[0] - 0.5, axis[0] + 0.5])
    mids = (axis[:-1] + axis[1:]) / 2
    return np.concatenate([[2 * axis[0] - mids[0]], mids, [2 * axis[-1] - mids[-1]]])


def _scatter(ax, data: LabeledDataset, size: float) -> None:
    for label, color in LABEL_COLORS.items():
        mask = np.asarray(data.labels) == label
        if mask.any():
            ax.scatter(data.points[mask, 0], data.points[mask, 1], s=size, c=color, label=f"y={label}")


def heatmap_figure(
    xs: np.ndarray,
    ys: np.ndarray,
    values: np.ndarray,
    title: str,
    outlines: Optional[Sequence[np.ndarray]] = None,
    points: Optional[LabeledDataset] = None,
) -> Figure:
    """values[r, c] is drawn at (xs[c], ys[r]); outlines are polygons in the same coordinates."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    values = np.ma.masked_invalid(np.asarray(values, dtype=float))
    xe, ye = _cell_edges(xs), _cell_edges(ys)
    lo, hi = (float(values.min()), float(values.max())) if values.count() else (0.0, 0.0)

    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    mesh = ax.pcolormesh(xe, ye, values, cmap=CMAP, shading="flat")
    fig.colorbar(mesh, ax=ax)
    for outline in outlines or ():
        ax.add_patch(Polygon(outline, closed=True, fill=False, edgecolor="white", linewidth=1.0))
    if points is not None:
        _scatter(ax, points, size=12.0)
    ax.set_xlim(xe[0], xe[-1])
    ax.set_ylim(ye[0], ye[-1])
    ax.set_title(f"{title}  min={lo:.4f} max={hi:.4f}")
    return fig


def heatmap_svg(xs, ys, values, title: str, outlines=None, points=None) -> str:
    return figure_svg(heatmap_figure(xs, ys, values, title, outlines=outlines, points=points))


def translation_outlines(fan: Fan, a, data: LabeledDataset) -> List[np.ndarray]:
    """-Star(a) + x for every data point: the translations that keep x inside the star."""
    polygon = star_polygon(fan, a)
    return [x - polygon for x in data.points]


def star_figure(fan: Fan, a, data: LabeledDataset, title: str = "fitted star") -> Figure:
    """The star Star(a) over the data points (colored by label)."""
    polygon = star_polygon(fan, a)
    extent = max(float(np.abs(polygon).max()), float(np.abs(data.points).max()), 1e-9) * 1.05
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()
    ax.add_patch(Polygon(polygon, closed=True, fill=False, edgecolor="black", linewidth=1.5))
    _scatter(ax, data, size=6.0)
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    ax.set_title(title)
    return fig


def star_svg(fan: Fan, a, data: LabeledDataset, title: str = "fitted star") -> str:
    return figure_svg(star_figure(fan, a, data, title))
