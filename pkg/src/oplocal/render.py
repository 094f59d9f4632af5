"""File renderers for the report path: DOT graphs and matplotlib figures."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .partitions import Partition
from .statespace import GeneratedMonoid

_PALETTE = (
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6",
    "#ffff99", "#1f78b4", "#33a02c", "#e31a1c", "#ff7f00",
)


def generator_graph_dot(
    ops: GeneratedMonoid,
    components: Optional[Partition] = None,
    labels: Optional[Sequence[str]] = None,
) -> str:
    """DOT text for the generators' functional graph, components colored."""
    n = ops.space.size
    if labels is None:
        labels = [ops.space.label(x) for x in range(n)]
    lines = ["digraph generators {", "  node [style=filled];"]
    for x in range(n):
        color = ""
        if components is not None:
            color = f' fillcolor="{_PALETTE[components.class_of[x] % len(_PALETTE)]}"'
        lines.append(f'  s{x} [label="{labels[x]}"{color}];')
    for g in ops.generators:
        gname = g.name or "g"
        for x, y in enumerate(g.table):
            lines.append(f'  s{x} -> s{y} [label="{gname}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def quotient_dot(p: Partition, labels: Optional[Sequence[str]] = None) -> str:
    """DOT text mapping states onto their quotient classes."""
    n = p.size
    if labels is None:
        labels = [str(x) for x in range(n)]
    lines = ["digraph quotient {", "  rankdir=LR;", "  node [style=filled];"]
    for c in range(p.num_classes):
        lines.append(
            f'  c{c} [label="[{c}]" shape=box '
            f'fillcolor="{_PALETTE[c % len(_PALETTE)]}"];'
        )
    for x in range(n):
        lines.append(f'  s{x} [label="{labels[x]}"];')
        lines.append(f"  s{x} -> c{p.class_of[x]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_embedding_figure(
    coords: np.ndarray,
    path: str | Path,
    labels: Optional[Sequence[str]] = None,
    truth: Optional[np.ndarray] = None,
    title: str = "",
) -> Path:
    """Scatter an embedding to an image file (format from the extension).

    One- and two-dimensional embeddings are drawn directly; higher
    dimensions show the first two coordinates.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2:
        raise ValueError("coords must be an n x k array")
    xs = coords[:, 0]
    ys = coords[:, 1] if coords.shape[1] > 1 else np.zeros_like(xs)

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(xs, ys, s=40, color="#1f78b4", zorder=3, label="recovered")
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        tx = truth[:, 0]
        ty = truth[:, 1] if truth.shape[1] > 1 else np.zeros_like(tx)
        ax.scatter(tx, ty, s=60, facecolors="none", edgecolors="#e31a1c",
                   zorder=2, label="truth")
        ax.legend(loc="best", fontsize=8)
    if labels is not None:
        for x, y, text in zip(xs, ys, labels):
            ax.annotate(str(text), (x, y), textcoords="offset points",
                        xytext=(4, 4), fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, linewidth=0.3, alpha=0.5)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path
