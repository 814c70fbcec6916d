"""SVG rendering of an embedding: one stroke per edge, width from the node
radii, one color per level-1 subtree. The y axis is flipped to screen-down."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .embedding import EmbeddingSolution
from .skeleton import SkeletonTree, SubtreeHierarchy

# colorblind-safe qualitative palette
PALETTE = ["#0072b2", "#d55e00", "#009e73", "#cc79a7",
           "#e69f00", "#56b4e9", "#f0e442", "#8c510a"]
DEFAULT_COLOR = "#444444"


def subtree_colors(tree: SkeletonTree, hierarchy: SubtreeHierarchy) -> dict[int, str]:
    """node id -> stroke color; nodes above the first branchings keep the
    default color."""
    colors = {nid: DEFAULT_COLOR for nid in tree.nodes}
    if hierarchy.m >= 1:
        for i, sub in enumerate(hierarchy.levels[1]):
            color = PALETTE[i % len(PALETTE)]
            for nid in sub.node_ids:
                colors[nid] = color
    return colors


def render_svg(solution: EmbeddingSolution, tree: SkeletonTree,
               hierarchy: SubtreeHierarchy, scale: float = 40.0,
               margin: float = 20.0) -> str:
    pts = np.array([solution.uv[nid] for nid in tree.nodes])
    radii = np.array([tree.nodes[nid].radius for nid in tree.nodes])
    pad = radii.max() if len(radii) else 0.0
    lo = (pts - pad).min(axis=0) * scale - margin
    hi = (pts + pad).max(axis=0) * scale + margin
    width, height = hi - lo
    colors = subtree_colors(tree, hierarchy)

    def to_screen(uv):
        x = uv[0] * scale - lo[0]
        y = height - (uv[1] * scale - lo[1])  # flip: svg y grows downward
        return x, y

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<!-- y axis flipped: screen_y = height - (uv_y * scale - min_y) -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" '
        f'height="{height:.1f}" viewBox="0 0 {width:.1f} {height:.1f}">',
    ]
    for nid, node in tree.nodes.items():
        if node.parent is None:
            continue
        x1, y1 = to_screen(solution.uv[node.parent])
        x2, y2 = to_screen(solution.uv[nid])
        w = 2.0 * max(node.radius, tree.nodes[node.parent].radius) * scale
        w = max(w, 1.0)
        lines.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke={quoteattr(colors[nid])} stroke-width="{w:.2f}" '
            'stroke-linecap="round"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
