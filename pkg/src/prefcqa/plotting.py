"""Figures of conflict hypergraphs, priorities and repairs.

Facts sit on a circle.  Binary conflicts are drawn as lines and larger
ones as shaded polygons; priority pairs are arrows from winner to loser.
Each requested repair gets its own panel with its members highlighted.
Only the object-oriented matplotlib API is used, so no display is needed.
"""

from __future__ import annotations

import math
from typing import Sequence

from matplotlib.figure import Figure
from matplotlib.patches import FancyArrowPatch, Polygon

from .context import Context
from .formats import format_fact

MAX_PANELS = 12


def _layout(n: int) -> list[tuple[float, float]]:
    if n == 1:
        return [(0.0, 0.0)]
    return [(math.cos(math.pi / 2 - 2 * math.pi * k / n), math.sin(math.pi / 2 - 2 * math.pi * k / n))
            for k in range(n)]


def _draw(ax, ctx: Context, members: frozenset | None, title: str) -> None:
    hg = ctx.hypergraph
    pos = _layout(len(hg.nodes)) if hg.nodes else []
    for edge in hg.edges:
        pts = [pos[hg.index[f]] for f in sorted(edge, key=hg.index.get)]
        if len(pts) == 2:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], color="tab:red", lw=1.2, zorder=1)
        else:
            ax.add_patch(Polygon(pts, closed=True, alpha=0.15, color="tab:red", zorder=1))
    for w, l in ctx.priority.sorted_pairs():
        ax.add_patch(FancyArrowPatch(pos[hg.index[w]], pos[hg.index[l]], arrowstyle="-|>",
                                     mutation_scale=12, shrinkA=14, shrinkB=14,
                                     color="tab:blue", connectionstyle="arc3,rad=0.15", zorder=2))
    for f, (x, y) in zip(hg.nodes, pos):
        inside = members is not None and f in members
        ax.scatter([x], [y], s=160, zorder=3,
                   color="tab:green" if inside else "white", edgecolors="black")
        ax.annotate(format_fact(f), (x, y), xytext=(0, 11), textcoords="offset points",
                    ha="center", fontsize=7)
    ax.set_title(title, fontsize=9)
    ax.set_xlim(-1.6, 1.6)
    ax.set_ylim(-1.4, 1.5)
    ax.set_aspect("equal")
    ax.axis("off")


def render_figure(ctx: Context, repairs: Sequence[frozenset] = (), title: str = "") -> Figure:
    """One panel for the bare instance, or one per repair (at most :data:`MAX_PANELS`)."""
    shown = list(repairs)[:MAX_PANELS]
    panels = max(1, len(shown))
    cols = min(panels, 3)
    rows = math.ceil(panels / cols)
    fig = Figure(figsize=(4.2 * cols, 4.0 * rows))
    axes = fig.subplots(rows, cols, squeeze=False)
    if not shown:
        _draw(axes[0][0], ctx, None, title or "conflict hypergraph")
    for k, r in enumerate(shown):
        _draw(axes[k // cols][k % cols], ctx, r, f"{title} {k + 1}".strip())
    for k in range(panels, rows * cols):
        axes[k // cols][k % cols].axis("off")
    fig.tight_layout()
    return fig


def save_figure(ctx: Context, path: str, repairs: Sequence[frozenset] = (), title: str = "") -> None:
    render_figure(ctx, repairs, title).savefig(path, dpi=110)
