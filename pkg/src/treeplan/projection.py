"""Target-angle extraction by projecting node sets onto principal planes.

Every non-root node gets a target angle theta in [0, 2*pi): the angle at its
parent between the parent->grandparent ray and the parent->node ray, measured
in the projection plane of the deepest subtree view that contains the whole
branching set or chain. Children of the root use a virtual grandparent one
plane-Y unit below the root, which is also the convention the layout stage
uses, so identity ratios reproduce in-plane trees exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import normalize
from .skeleton import Segment, SkeletonTree, SubtreeHierarchy, segment_of_node
from .viewpoint import ViewEntry, ViewHierarchy

TWO_PI = 2.0 * math.pi
DEGENERATE_EPS = 1e-9


@dataclass
class PrincipalPlane:
    """Projection frame of one subtree view: screen-right x, screen-up y,
    normal along the look direction (x cross y faces back toward the camera)."""

    point: np.ndarray
    normal: np.ndarray
    in_plane_x: np.ndarray
    in_plane_y: np.ndarray


@dataclass
class TargetAngles:
    per_node: dict[int, float] = field(default_factory=dict)     # theta in [0, 2pi)
    per_node3d: dict[int, float] = field(default_factory=dict)   # acute 3D angle
    degenerate: set[int] = field(default_factory=set)

    def to_json(self) -> dict:
        return {
            "perNode": {str(k): float(v) for k, v in sorted(self.per_node.items())},
            "perNode3D": {str(k): float(v) for k, v in sorted(self.per_node3d.items())},
            "degenerate": sorted(self.degenerate),
        }


def principal_plane(entry: ViewEntry) -> PrincipalPlane:
    normal = normalize(entry.pose.look_at - entry.pose.position)
    x_axis = normalize(np.cross(normal, entry.pose.up))
    y_axis = normalize(np.cross(x_axis, normal))
    return PrincipalPlane(point=entry.center.copy(), normal=normal,
                          in_plane_x=x_axis, in_plane_y=y_axis)


def project_point(p: np.ndarray, plane: PrincipalPlane) -> np.ndarray:
    d = np.asarray(p, dtype=np.float64) - plane.point
    return np.array([float(d @ plane.in_plane_x), float(d @ plane.in_plane_y)])


def ccw_angle(ref: np.ndarray, ray: np.ndarray) -> float:
    """Angle in [0, 2pi) swept from `ray` up to `ref`; pi for opposite rays.

    With ref = parent->grandparent and ray = parent->node this realizes the
    node-angle convention: an L bend (ref (-1,0), ray (0,1)) measures pi/2.
    """
    a = math.atan2(ref[1], ref[0]) - math.atan2(ray[1], ray[0])
    return a % TWO_PI


def fold_acute(angle: float) -> float:
    """Fold an angle in [0, 2pi) to the acute range [0, pi/2]."""
    a = angle % TWO_PI
    a = min(a, TWO_PI - a)   # unsigned angle between rays, [0, pi]
    return min(a, math.pi - a)


def _deepest_plane(node_set: set[int], hierarchy: SubtreeHierarchy,
                   views: ViewHierarchy,
                   cache: dict[tuple[int, int], PrincipalPlane]) -> PrincipalPlane:
    """Plane of the deepest subtree containing the whole set (level 0 always
    does)."""
    for level in reversed(hierarchy.levels):
        for sub in level:
            if node_set <= sub.node_ids:
                key = (sub.level, sub.root_id)
                if key not in cache:
                    cache[key] = principal_plane(views.entry_for(*key))
                return cache[key]
    raise ValueError("hierarchy has no level-0 subtree")  # pragma: no cover


def compute_target_angles(tree: SkeletonTree, segments: list[Segment],
                          hierarchy: SubtreeHierarchy,
                          views: ViewHierarchy) -> TargetAngles:
    """Project branching sets and chains onto their local planes and record
    per-node target angles plus the acute 3D reference angles for the
    structural loss metric."""
    seg_of = segment_of_node(segments)
    targets = TargetAngles()
    plane_cache: dict[tuple[int, int], PrincipalPlane] = {}
    branch_plane: dict[int, PrincipalPlane] = {}
    chain_plane: dict[int, PrincipalPlane] = {}

    for nid in tree.ids_topo():
        if nid == tree.root_id:
            continue
        n = tree.nodes[nid]
        pid = n.parent
        p = tree.nodes[pid]
        if len(p.children) >= 2:
            # branching set: the parent, its parent, and all its children
            if pid not in branch_plane:
                group = {pid} | set(p.children)
                if p.parent is not None:
                    group.add(p.parent)
                branch_plane[pid] = _deepest_plane(group, hierarchy, views, plane_cache)
            plane = branch_plane[pid]
        else:
            seg_idx = seg_of[nid]
            if seg_idx not in chain_plane:
                seg = segments[seg_idx]
                group = set(seg.node_ids)
                first_parent = tree.nodes[seg.first].parent
                group.add(first_parent)
                gp = tree.nodes[first_parent].parent
                if gp is not None:
                    group.add(gp)
                chain_plane[seg_idx] = _deepest_plane(group, hierarchy, views, plane_cache)
            plane = chain_plane[seg_idx]

        p_uv = project_point(p.position, plane)
        n_uv = project_point(n.position, plane)
        if p.parent is not None:
            g_uv = project_point(tree.nodes[p.parent].position, plane)
        else:
            g_uv = p_uv + np.array([0.0, -1.0])  # virtual grandparent below the root
        ref = g_uv - p_uv
        ray = n_uv - p_uv
        if np.linalg.norm(ref) < DEGENERATE_EPS or np.linalg.norm(ray) < DEGENERATE_EPS:
            targets.per_node[nid] = targets.per_node.get(pid, math.pi)
            targets.degenerate.add(nid)
        else:
            targets.per_node[nid] = ccw_angle(ref, ray)

        if p.parent is not None:
            v_ref = tree.nodes[p.parent].position - p.position
            v_ray = n.position - p.position
            denom = np.linalg.norm(v_ref) * np.linalg.norm(v_ray)
            cosang = float(np.clip(v_ref @ v_ray / denom, -1.0, 1.0))
            ang = math.acos(cosang)
            targets.per_node3d[nid] = min(ang, math.pi - ang)
    return targets
