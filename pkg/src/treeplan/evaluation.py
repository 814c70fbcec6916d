"""Geometry-loss reports for an embedding.

Two views of the same embedding: the projected-target metric compares
realized 2D lengths/angles against the solver's targets, the structural
metric compares them against the original 3D edge lengths and acute
inter-edge angles. Sums follow the relative-loss form |x - x_e| / x; the
report also carries per-node maxima and sum/N averages to match the usual
table layout. The root contributes zero to everything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .crossing import count_crossings, crossing_points
from .embedding import EmbeddingSolution
from .projection import TargetAngles, ccw_angle, fold_acute
from .skeleton import Segment, SkeletonTree, segment_tree

ANGLE_GUARD = 1e-6  # reference angles below this are excluded, not divided by


@dataclass
class MetricLoss:
    length_sum: float = 0.0
    angle_sum: float = 0.0
    length_max: float = 0.0
    angle_max: float = 0.0
    length_avg: float = 0.0
    angle_avg: float = 0.0
    excluded: int = 0  # nodes skipped by the near-zero reference guard

    def to_json(self) -> dict:
        return {
            "L_l": self.length_sum, "L_a": self.angle_sum,
            "maxL_l": self.length_max, "maxL_a": self.angle_max,
            "avgL_l": self.length_avg, "avgL_a": self.angle_avg,
            "excluded": self.excluded,
        }


@dataclass
class GeometryLossReport:
    metric1: MetricLoss
    metric2: MetricLoss
    crossings: int
    node_count: int
    degenerate_targets: int = 0
    crossing_points: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "metric1": self.metric1.to_json(),
            "metric2": self.metric2.to_json(),
            "crossings": self.crossings,
            "crossingPoints": [[float(x), float(y)] for x, y in self.crossing_points],
            "nodeCount": self.node_count,
            "degenerateTargets": self.degenerate_targets,
        }


def _realized_angle(uv: dict[int, np.ndarray], tree: SkeletonTree, nid: int) -> float:
    n = tree.nodes[nid]
    p_uv = uv[n.parent]
    gp = tree.nodes[n.parent].parent
    g_uv = uv[gp] if gp is not None else p_uv + np.array([0.0, -1.0])
    return ccw_angle(g_uv - p_uv, uv[nid] - p_uv)


def _lengths_loss(solution: EmbeddingSolution, tree: SkeletonTree) -> tuple[float, float]:
    total = 0.0
    worst = 0.0
    for nid, n in tree.nodes.items():
        if n.parent is None:
            continue
        l = tree.edge_length(nid)
        le = float(np.linalg.norm(solution.uv[nid] - solution.uv[n.parent]))
        loss = abs(l - le) / l
        total += loss
        worst = max(worst, loss)
    return total, worst


def metric1(solution: EmbeddingSolution, targets: TargetAngles,
            tree: SkeletonTree) -> MetricLoss:
    """Loss against the solver's targets: 3D edge lengths vs realized 2D
    lengths, target angles vs realized 2D angles.

    Nodes whose parent is the root have no grandparent; their angle target
    is a realization convention against a fixed virtual reference, so they
    are excluded here, which keeps the metric invariant under rigid motion
    of the solution."""
    out = MetricLoss()
    out.length_sum, out.length_max = _lengths_loss(solution, tree)
    for nid, theta_t in targets.per_node.items():
        if tree.nodes[tree.nodes[nid].parent].parent is None:
            continue
        if theta_t < ANGLE_GUARD:
            out.excluded += 1
            continue
        theta_e = _realized_angle(solution.uv, tree, nid)
        loss = abs(theta_t - theta_e) / theta_t
        out.angle_sum += loss
        out.angle_max = max(out.angle_max, loss)
    n = len(tree)
    out.length_avg = out.length_sum / n
    out.angle_avg = out.angle_sum / n
    return out


def metric2(solution: EmbeddingSolution, targets: TargetAngles,
            tree: SkeletonTree) -> MetricLoss:
    """Loss against the 3D structure: same length form, and realized angles
    folded to [0, pi/2] against the acute 3D reference angles (root and the
    root's children carry no reference and contribute zero)."""
    out = MetricLoss()
    out.length_sum, out.length_max = _lengths_loss(solution, tree)
    for nid, ref in targets.per_node3d.items():
        if ref < ANGLE_GUARD:
            out.excluded += 1
            continue
        realized = fold_acute(_realized_angle(solution.uv, tree, nid))
        loss = abs(ref - realized) / ref
        out.angle_sum += loss
        out.angle_max = max(out.angle_max, loss)
    n = len(tree)
    out.length_avg = out.length_sum / n
    out.angle_avg = out.angle_sum / n
    return out


def report(tree: SkeletonTree, solution: EmbeddingSolution, targets: TargetAngles,
           segments: list[Segment] | None = None) -> GeometryLossReport:
    if segments is None:
        segments = segment_tree(tree)
    total, _per_segment = count_crossings(solution.uv, tree, segments=segments)
    points = [pt for _, _, pt in crossing_points(solution.uv, tree)]
    return GeometryLossReport(
        metric1=metric1(solution, targets, tree),
        metric2=metric2(solution, targets, tree),
        crossings=total,
        node_count=len(tree),
        degenerate_targets=len(targets.degenerate),
        crossing_points=points,
    )


def report_to_json(rep: GeometryLossReport) -> str:
    return json.dumps(rep.to_json(), indent=2) + "\n"


def format_table(rep: GeometryLossReport) -> str:
    """Aligned text table, one row per metric (Avg = sum / node count)."""
    header = f"{'':<22}{'Max L(a)':>10}{'Avg L(a)':>10}{'Max L(l)':>10}{'Avg L(l)':>10}"
    rows = [header]
    for name, m in (("Projected targets", rep.metric1), ("3D structure", rep.metric2)):
        rows.append(f"{name:<22}{m.angle_max:>10.4f}{m.angle_avg:>10.4f}"
                    f"{m.length_max:>10.4f}{m.length_avg:>10.4f}")
    rows.append(f"crossings: {rep.crossings}   nodes: {rep.node_count}   "
                f"degenerate targets: {rep.degenerate_targets}")
    return "\n".join(rows) + "\n"
