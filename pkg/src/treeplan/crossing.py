"""Thick-stroke (capsule) crossing detection for 2D layouts.

Every tree edge is tested against every non-adjacent edge (no shared node) as
a capsule: the 2D segment thickened by the larger of its two endpoint radii,
which is conservative for the rendered, linearly tapered stroke. A pair
crosses when the segments properly intersect (covers zero radii) or their
distance is strictly below the radius sum. The coarse phase is an axis sweep
over radius-expanded bounding boxes; the fine phase is an exact
segment-distance test, so counts match an all-pairs check bit for bit.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .skeleton import Segment, SkeletonTree, segment_of_node, segment_tree


@njit(cache=True, nogil=True)
def _point_seg_dist2(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        t = 0.0
    else:
        t = (wx * vx + wy * vy) / vv
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    dx, dy = wx - t * vx, wy - t * vy
    return dx * dx + dy * dy


@njit(cache=True, nogil=True)
def _orient(ax, ay, bx, by, cx, cy):
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


@njit(cache=True, nogil=True)
def _on_seg(ax, ay, bx, by, px, py):
    return (min(ax, bx) <= px <= max(ax, bx)
            and min(ay, by) <= py <= max(ay, by))


@njit(cache=True, nogil=True)
def _segs_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_seg(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_seg(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_seg(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_seg(cx, cy, dx, dy, bx, by):
        return True
    return False


@njit(cache=True, nogil=True)
def _seg_seg_dist2(ax, ay, bx, by, cx, cy, dx, dy):
    if _segs_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    d = _point_seg_dist2(cx, cy, ax, ay, bx, by)
    d = min(d, _point_seg_dist2(dx, dy, ax, ay, bx, by))
    d = min(d, _point_seg_dist2(ax, ay, cx, cy, dx, dy))
    d = min(d, _point_seg_dist2(bx, by, cx, cy, dx, dy))
    return d


@njit(cache=True, nogil=True)
def _capsules_cross(ax, ay, bx, by, ra, cx, cy, dx, dy, rb):
    if _segs_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return True
    rsum = ra + rb
    if rsum <= 0.0:
        return False
    return _seg_seg_dist2(ax, ay, bx, by, cx, cy, dx, dy) < rsum * rsum


@njit(cache=True, nogil=True)
def _edge_boxes(uv, parent_idx, cap_rad):
    n = uv.shape[0]
    ne = n - 1
    boxes = np.empty((ne, 4))
    for e in range(ne):
        c = e + 1
        p = parent_idx[c]
        r = cap_rad[c]
        x1, y1 = uv[c, 0], uv[c, 1]
        x2, y2 = uv[p, 0], uv[p, 1]
        boxes[e, 0] = min(x1, x2) - r
        boxes[e, 1] = max(x1, x2) + r
        boxes[e, 2] = min(y1, y2) - r
        boxes[e, 3] = max(y1, y2) + r
    return boxes


@njit(cache=True, nogil=True)
def _count_layout(uv, parent_idx, cap_rad):
    """Crossing-pair count for one layout via an x-sweep over edge boxes."""
    ne = uv.shape[0] - 1
    if ne < 2:
        return 0
    boxes = _edge_boxes(uv, parent_idx, cap_rad)
    order = np.argsort(boxes[:, 0])
    count = 0
    for ii in range(ne):
        u = order[ii]
        for jj in range(ii + 1, ne):
            v = order[jj]
            if boxes[v, 0] > boxes[u, 1]:
                break
            if boxes[v, 2] > boxes[u, 3] or boxes[v, 3] < boxes[u, 2]:
                continue
            cu, cv = u + 1, v + 1
            if cu == parent_idx[cv] or cv == parent_idx[cu] \
                    or parent_idx[cu] == parent_idx[cv]:
                continue
            if _capsules_cross(uv[cu, 0], uv[cu, 1],
                               uv[parent_idx[cu], 0], uv[parent_idx[cu], 1],
                               cap_rad[cu],
                               uv[cv, 0], uv[cv, 1],
                               uv[parent_idx[cv], 0], uv[parent_idx[cv], 1],
                               cap_rad[cv]):
                count += 1
    return count


@njit(cache=True, nogil=True)
def _collect_layout(uv, parent_idx, cap_rad):
    """Like _count_layout but returns the crossing pairs as child-node index
    rows (k, 2)."""
    ne = uv.shape[0] - 1
    pairs = np.empty((max(ne * ne, 1), 2), dtype=np.int64)
    k = 0
    if ne < 2:
        return pairs[:0]
    boxes = _edge_boxes(uv, parent_idx, cap_rad)
    order = np.argsort(boxes[:, 0])
    for ii in range(ne):
        u = order[ii]
        for jj in range(ii + 1, ne):
            v = order[jj]
            if boxes[v, 0] > boxes[u, 1]:
                break
            if boxes[v, 2] > boxes[u, 3] or boxes[v, 3] < boxes[u, 2]:
                continue
            cu, cv = u + 1, v + 1
            if cu == parent_idx[cv] or cv == parent_idx[cu] \
                    or parent_idx[cu] == parent_idx[cv]:
                continue
            if _capsules_cross(uv[cu, 0], uv[cu, 1],
                               uv[parent_idx[cu], 0], uv[parent_idx[cu], 1],
                               cap_rad[cu],
                               uv[cv, 0], uv[cv, 1],
                               uv[parent_idx[cv], 0], uv[parent_idx[cv], 1],
                               cap_rad[cv]):
                pairs[k, 0] = cu
                pairs[k, 1] = cv
                k += 1
    return pairs[:k]


@njit(cache=True, nogil=True, parallel=True)
def _count_batch(uvs, parent_idx, cap_rad, out):
    for i in prange(uvs.shape[0]):
        out[i] = _count_layout(uvs[i], parent_idx, cap_rad)


def layout_arrays(tree: SkeletonTree, uv: dict[int, np.ndarray],
                  radii: dict[int, float] | None = None
                  ) -> tuple[list[int], np.ndarray, np.ndarray, np.ndarray]:
    """(topo ids, uv (N,2), parent index (N,), per-edge capsule radius (N,))
    for the kernel entry points; capsule radius of the root entry is 0."""
    ids = tree.ids_topo()
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    uv_arr = np.empty((n, 2))
    parent_idx = np.full(n, -1, dtype=np.int64)
    cap = np.zeros(n)
    rad = {nid: tree.nodes[nid].radius for nid in ids}
    if radii is not None:
        rad.update(radii)
    for i, nid in enumerate(ids):
        uv_arr[i] = uv[nid]
        parent = tree.nodes[nid].parent
        if parent is not None:
            parent_idx[i] = index[parent]
            cap[i] = max(rad[nid], rad[parent])
    return ids, uv_arr, parent_idx, cap


def count_crossings(uv: dict[int, np.ndarray], tree: SkeletonTree,
                    radii: dict[int, float] | None = None,
                    segments: list[Segment] | None = None
                    ) -> tuple[int, np.ndarray]:
    """Total crossing-pair count plus the per-segment attribution X_i (each
    crossing counts toward both involved segments)."""
    if segments is None:
        segments = segment_tree(tree)
    ids, uv_arr, parent_idx, cap = layout_arrays(tree, uv, radii)
    pairs = _collect_layout(uv_arr, parent_idx, cap)
    seg_of = segment_of_node(segments)
    per_segment = np.zeros(len(segments), dtype=np.int64)
    for cu, cv in pairs:
        per_segment[seg_of[ids[cu]]] += 1
        per_segment[seg_of[ids[cv]]] += 1
    return pairs.shape[0], per_segment


def crossing_points(uv: dict[int, np.ndarray], tree: SkeletonTree,
                    radii: dict[int, float] | None = None
                    ) -> list[tuple[int, int, tuple[float, float]]]:
    """Crossing pairs as (child id of edge a, child id of edge b, midpoint of
    the closest approach) for marker rendering."""
    ids, uv_arr, parent_idx, cap = layout_arrays(tree, uv, radii)
    out = []
    for cu, cv in _collect_layout(uv_arr, parent_idx, cap):
        a0, a1 = uv_arr[cu], uv_arr[parent_idx[cu]]
        b0, b1 = uv_arr[cv], uv_arr[parent_idx[cv]]
        pt = _closest_midpoint(a0, a1, b0, b1)
        out.append((ids[cu], ids[cv], (float(pt[0]), float(pt[1]))))
    return out


def _closest_midpoint(a0, a1, b0, b1) -> np.ndarray:
    best = None
    best_d = math.inf
    for s in np.linspace(0.0, 1.0, 17):
        p = a0 + s * (a1 - a0)
        d = _point_seg_dist2(p[0], p[1], b0[0], b0[1], b1[0], b1[1])
        if d < best_d:
            best_d = d
            vx, vy = b1 - b0
            vv = vx * vx + vy * vy
            t = 0.0 if vv <= 0 else min(max(((p[0] - b0[0]) * vx + (p[1] - b0[1]) * vy) / vv, 0.0), 1.0)
            q = b0 + t * (b1 - b0)
            best = 0.5 * (p + q)
    return best
