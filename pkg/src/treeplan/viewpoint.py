"""Camera view quality metric and hierarchical best-view search.

A view's quality over an enhanced tree is the KL-style divergence between
projected edge-length proportions and true 3D proportions: 0 means the view
preserves every length ratio exactly, larger values mean more foreshortening
or overlap. Optimal views are searched per subtree on a sphere around the
subtree's weighted center using a seeded particle swarm over (azimuth, polar)
plus a deterministic simplex polish.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .geometry import normalize, perpendicular_up
from .skeleton import EnhancedTree, SubtreeHierarchy

_LOG2 = np.log(2.0)


class DegenerateViewError(ValueError):
    """All filtered edges project to zero length, or the subtree carries no
    edges at all."""


@dataclass
class CameraPose:
    position: np.ndarray  # (3,)
    look_at: np.ndarray   # (3,) target point
    up: np.ndarray        # (3,) unit, perpendicular to the look direction

    def look_dir(self) -> np.ndarray:
        return normalize(self.look_at - self.position)


@dataclass
class ViewSearchConfig:
    particles: int = 256
    iterations: int = 60
    omega_g: float = 0.05
    omega_p: float = 0.05
    omega_inert: float = 0.0375
    beta: float = 1.5  # camera distance = beta * subtree radius
    seed: int = 0
    objective: str = "minimize"  # or "maximize"
    polish: bool = True


@dataclass
class ViewEntry:
    level: int
    subtree_root: int
    node_ids: frozenset[int]
    pose: CameraPose
    energy: float
    center: np.ndarray      # search-sphere center (weighted subtree center)
    search_radius: float    # camera distance D = beta * subtree radius


@dataclass
class ViewHierarchy:
    entries: list[ViewEntry] = field(default_factory=list)

    def entry_for(self, level: int, subtree_root: int) -> ViewEntry:
        for e in self.entries:
            if e.level == level and e.subtree_root == subtree_root:
                return e
        raise KeyError((level, subtree_root))


def filtered_edges(etree: EnhancedTree, node_filter: frozenset[int] | set[int] | None = None
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Edge vectors and lengths for the view metric.

    An edge belongs to the filter through its owner: a real edge through its
    child node, a grandparent/parent-sibling edge through the node whose
    relation defines it, a sibling edge through either endpoint. Ownership
    (rather than both-endpoints containment) keeps leaf segments viewable.
    Returns (vectors (E,3), lengths (E,)) with zero-length entries dropped.
    """
    tree = etree.base
    if node_filter is None:
        node_filter = frozenset(tree.nodes)
    vecs = []
    for nid in node_filter:
        n = tree.nodes[nid]
        if n.parent is not None:
            vecs.append(tree.nodes[n.parent].position - n.position)
    for a, b, kind in etree.imaginary_edges:
        owned = (a in node_filter or b in node_filter) if kind == "sibling" \
            else a in node_filter
        if owned:
            vecs.append(tree.nodes[b].position - tree.nodes[a].position)
    if not vecs:
        return np.zeros((0, 3)), np.zeros(0)
    v = np.asarray(vecs, dtype=np.float64)
    lengths = np.linalg.norm(v, axis=1)
    keep = lengths > 0.0
    return v[keep], lengths[keep]


def information_batch(directions: np.ndarray, vectors: np.ndarray,
                      lengths: np.ndarray) -> np.ndarray:
    """Vectorized view metric for unit view `directions` (K,3) over edges;
    degenerate views (total projected length ~ 0) come back as +inf."""
    total = lengths.sum()
    p = lengths / total
    dots = directions @ vectors.T                      # (K, E)
    proj = np.sqrt(np.maximum(lengths[None, :] ** 2 - dots ** 2, 0.0))
    sums = proj.sum(axis=1)
    out = np.full(directions.shape[0], np.inf)
    ok = sums > 1e-12 * total
    if not np.any(ok):
        return out
    q = proj[ok] / sums[ok, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = q * (np.log(q / p[None, :]) / _LOG2)
    terms[q <= 0.0] = 0.0
    # the divergence is non-negative; drop the float noise around exact zero
    out[ok] = np.maximum(terms.sum(axis=1), 0.0)
    return out


def view_information(view: CameraPose, etree: EnhancedTree,
                     subtree_filter: frozenset[int] | set[int] | None = None) -> float:
    """Information carried by `view` over the (filtered) enhanced tree.

    Sums q_o * log2(q_o / p_o) where p_o is the 3D length share of edge o and
    q_o its share of total orthographically projected length; zero-projection
    terms contribute 0. Non-negative; 0 iff projection keeps all ratios.
    """
    vectors, lengths = filtered_edges(etree, subtree_filter)
    if len(lengths) == 0:
        raise DegenerateViewError("no edges under the given filter")
    d = view.look_dir()
    value = information_batch(d[None, :], vectors, lengths)[0]
    if not np.isfinite(value):
        raise DegenerateViewError("all edges project to zero length in this view")
    return float(value)


def subtree_center_radius(etree: EnhancedTree,
                          node_filter: frozenset[int] | set[int]) -> tuple[np.ndarray, float]:
    """Weighted center (each node weighted by half the length of its incident
    filtered real edges) and the max distance from it to any filter node.

    When every filter node sits at the center (single-node subtree) the
    radius falls back to the farthest endpoint of any filtered edge so the
    camera sphere stays positive.
    """
    tree = etree.base
    weights: dict[int, float] = {nid: 0.0 for nid in node_filter}
    endpoints = set(node_filter)
    for nid in node_filter:
        n = tree.nodes[nid]
        if n.parent is None:
            continue
        l = tree.edge_length(nid)
        weights[nid] += 0.5 * l
        if n.parent in weights:
            weights[n.parent] += 0.5 * l
        endpoints.add(n.parent)
    total = sum(weights.values())
    if total <= 0.0:
        pts = np.array([tree.nodes[i].position for i in sorted(node_filter)])
        center = pts.mean(axis=0)
    else:
        center = np.zeros(3)
        for nid, w in weights.items():
            center += w * tree.nodes[nid].position
        center /= total
    radius = max(
        (float(np.linalg.norm(tree.nodes[i].position - center)) for i in node_filter),
        default=0.0)
    if radius <= 1e-12:
        for a, b, kind in etree.imaginary_edges:
            if a in node_filter or b in node_filter:
                endpoints.update((a, b))
        radius = max(
            (float(np.linalg.norm(tree.nodes[i].position - center)) for i in endpoints),
            default=0.0)
    return center, radius


def _sphere_dirs(az: np.ndarray, pol: np.ndarray) -> np.ndarray:
    sp = np.sin(pol)
    return np.stack([np.cos(az) * sp, np.sin(az) * sp, np.cos(pol)], axis=1)


def _canonical_offset(u: np.ndarray) -> np.ndarray:
    """The metric is exactly antipode-symmetric, so pick one hemisphere:
    flip the camera offset so its first significant component of (z, y, x)
    is positive. Keeps view sides consistent across subtrees of one plane."""
    for c in (u[2], u[1], u[0]):
        if abs(c) > 1e-9:
            return u if c > 0 else -u
    return u


def _pose_from_offset(center: np.ndarray, distance: float, u: np.ndarray) -> CameraPose:
    position = center + distance * u
    up = perpendicular_up(center - position)
    return CameraPose(position=position, look_at=center.copy(), up=up)


def find_best_view(etree: EnhancedTree, subtree: frozenset[int] | set[int],
                   config: ViewSearchConfig | None = None,
                   on_evaluate=None) -> tuple[CameraPose, float]:
    """Best camera pose for one subtree: swarm search over (azimuth, polar)
    on the sphere of radius beta*R around the subtree center, then a simplex
    polish. Returns (pose, metric value at the pose).

    `on_evaluate(directions, values)` is invoked for every probed batch.
    """
    config = config or ViewSearchConfig()
    vectors, lengths = filtered_edges(etree, subtree)
    if len(lengths) == 0:
        raise DegenerateViewError("subtree has no edges (single isolated node)")
    center, radius = subtree_center_radius(etree, subtree)
    if radius <= 1e-12:
        raise DegenerateViewError("subtree has no spatial extent")
    distance = config.beta * radius
    sign = 1.0 if config.objective == "minimize" else -1.0

    def score_batch(az, pol):
        values = information_batch(_sphere_dirs(az, pol), vectors, lengths)
        if on_evaluate is not None:
            on_evaluate(_sphere_dirs(az, pol), values)
        return sign * values

    rng = np.random.default_rng(config.seed)
    n = config.particles
    # Fibonacci lattice covers the sphere evenly; jitter breaks grid ties
    k = np.arange(n)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    pol = np.arccos(np.clip(1.0 - 2.0 * (k + 0.5) / n, -1.0, 1.0))
    az = np.mod(golden * k, 2.0 * np.pi)
    az = np.mod(az + rng.uniform(-0.01, 0.01, n), 2.0 * np.pi)
    pol = np.clip(pol + rng.uniform(-0.01, 0.01, n), 0.0, np.pi)

    x = np.stack([az, pol], axis=1)
    vel = np.zeros_like(x)
    scores = score_batch(x[:, 0], x[:, 1])
    pbest_x = x.copy()
    pbest_s = scores.copy()
    g_idx = int(np.argmin(scores))
    gbest_x = x[g_idx].copy()
    gbest_s = float(scores[g_idx])

    def wrap_az(delta):
        return np.mod(delta + np.pi, 2.0 * np.pi) - np.pi

    for _ in range(config.iterations):
        gamma = rng.uniform(-0.05, 0.05, size=x.shape)
        dg = np.stack([wrap_az(gbest_x[0] - x[:, 0]), gbest_x[1] - x[:, 1]], axis=1)
        dp = np.stack([wrap_az(pbest_x[:, 0] - x[:, 0]), pbest_x[:, 1] - x[:, 1]], axis=1)
        step = config.omega_g * dg + config.omega_p * dp \
            + config.omega_inert * (vel + gamma)
        new_x = x + step
        new_x[:, 0] = np.mod(new_x[:, 0], 2.0 * np.pi)
        new_x[:, 1] = np.clip(new_x[:, 1], 0.0, np.pi)
        vel = np.stack([wrap_az(new_x[:, 0] - x[:, 0]), new_x[:, 1] - x[:, 1]], axis=1)
        x = new_x
        scores = score_batch(x[:, 0], x[:, 1])
        better = scores < pbest_s
        pbest_x[better] = x[better]
        pbest_s[better] = scores[better]
        g_idx = int(np.argmin(pbest_s))
        if pbest_s[g_idx] < gbest_s:
            gbest_s = float(pbest_s[g_idx])
            gbest_x = pbest_x[g_idx].copy()

    if config.polish and np.isfinite(gbest_s):
        def fun(p):
            return float(score_batch(np.array([p[0]]), np.clip(np.array([p[1]]), 0.0, np.pi))[0])
        res = minimize(fun, gbest_x, method="Nelder-Mead",
                       options={"maxiter": 200, "xatol": 1e-10, "fatol": 1e-14})
        if np.isfinite(res.fun) and res.fun < gbest_s:
            gbest_s = float(res.fun)
            gbest_x = np.array([np.mod(res.x[0], 2.0 * np.pi),
                                np.clip(res.x[1], 0.0, np.pi)])

    if not np.isfinite(gbest_s):
        raise DegenerateViewError("every probed view was degenerate")
    u = _canonical_offset(_sphere_dirs(gbest_x[:1], gbest_x[1:])[0])
    return _pose_from_offset(center, distance, u), sign * gbest_s


def build_view_hierarchy(etree: EnhancedTree, hierarchy: SubtreeHierarchy,
                         config: ViewSearchConfig | None = None) -> ViewHierarchy:
    """One optimized pose per subtree at every level. Each subtree search is
    seeded from the base seed plus its ordinal, so results are reproducible
    regardless of evaluation order."""
    config = config or ViewSearchConfig()
    out = ViewHierarchy()
    ordinal = 0
    for level in hierarchy.levels:
        for sub in level:
            sub_cfg = ViewSearchConfig(
                particles=config.particles, iterations=config.iterations,
                omega_g=config.omega_g, omega_p=config.omega_p,
                omega_inert=config.omega_inert, beta=config.beta,
                seed=config.seed + ordinal, objective=config.objective,
                polish=config.polish)
            try:
                pose, energy = find_best_view(etree, sub.node_ids, sub_cfg)
            except DegenerateViewError as exc:
                raise DegenerateViewError(
                    f"subtree at level {sub.level} rooted at node "
                    f"{sub.root_id}: {exc}") from None
            center, radius = subtree_center_radius(etree, sub.node_ids)
            out.entries.append(ViewEntry(
                level=sub.level, subtree_root=sub.root_id, node_ids=sub.node_ids,
                pose=pose, energy=energy, center=center,
                search_radius=config.beta * radius))
            ordinal += 1
    return out


def views_to_json(views: ViewHierarchy) -> dict:
    return {"views": [
        {"level": e.level, "subtreeRoot": e.subtree_root,
         "position": [float(v) for v in e.pose.position],
         "lookAt": [float(v) for v in e.pose.look_at],
         "up": [float(v) for v in e.pose.up],
         "energy": float(e.energy)}
        for e in views.entries]}
