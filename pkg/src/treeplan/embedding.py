"""Intersection-free planar embedding via particle swarm over ratio sets.

A candidate embedding is an (M, 2) float array of per-segment ratios: column
0 is the length stretch r_l in [0, 2] and column 1 the angle blend r_a in
[-1, 1]. Layouts are realized by forward kinematics from the root (placed at
the origin, first edge reference pointing +Y), scored by the weighted sum of
squared ratios plus a crossing penalty, and optimized by a seeded swarm whose
particle 0 holds the identity ratios and particle 1 the ratios inverted from
the crossing-free radial layout. If the best particle still crosses, the
radial layout itself is returned, so an unpinned solve never ends worse than
the radial layout and never reports crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .crossing import _count_layout
from .projection import TargetAngles, ccw_angle
from .skeleton import Segment, SkeletonTree, segment_of_node

PI = math.pi
TWO_PI = 2.0 * math.pi

RL_MIN, RL_MAX = 0.0, 2.0
RA_MIN, RA_MAX = -1.0, 1.0


class EditError(ValueError):
    """Unknown segment or anchor in an interactive edit."""


@njit(cache=True, nogil=True)
def _adjust_angle(theta, ra):
    if theta <= PI:
        if ra >= 0.0:
            return theta + (PI - theta) * ra
        return (1.0 + ra) * theta
    if ra >= 0.0:
        return theta - (theta - PI) * ra
    return theta - (TWO_PI - theta) * ra


def adjust_angle(theta: float, r_a: float) -> float:
    """Blend a target angle toward pi (r_a > 0) or away from it (r_a < 0)
    without crossing it, so the bending direction survives: theta <= pi stays
    in [0, pi], theta > pi stays in [pi, 2*pi]. Identity at r_a = 0."""
    return float(_adjust_angle(float(theta), float(r_a)))


@njit(cache=True, nogil=True)
def _realize_one(ratios, theta, length3d, seg_idx, parent_idx, pinned_mask, pinned_uv):
    n = theta.shape[0]
    uv = np.empty((n, 2))
    uv[0, 0] = 0.0
    uv[0, 1] = 0.0
    for i in range(1, n):
        if pinned_mask[i]:
            uv[i, 0] = pinned_uv[i, 0]
            uv[i, 1] = pinned_uv[i, 1]
            continue
        p = parent_idx[i]
        if p == 0:
            refx, refy = 0.0, -1.0  # virtual grandparent one unit below the root
        else:
            g = parent_idx[p]
            refx = uv[g, 0] - uv[p, 0]
            refy = uv[g, 1] - uv[p, 1]
            inv = 1.0 / math.sqrt(refx * refx + refy * refy)
            refx *= inv
            refy *= inv
        m = seg_idx[i]
        te = _adjust_angle(theta[i], ratios[m, 1])
        c, s = math.cos(te), math.sin(te)
        dirx = c * refx + s * refy   # reference ray rotated by -te
        diry = -s * refx + c * refy
        scale = length3d[i] * (1.0 + ratios[m, 0])
        uv[i, 0] = uv[p, 0] + scale * dirx
        uv[i, 1] = uv[p, 1] + scale * diry
    return uv


@njit(cache=True, nogil=True, parallel=True)
def _evaluate_batch(ratios, theta, length3d, seg_idx, parent_idx, cap_rad,
                    pinned_mask, pinned_uv, wl, wa, wx, out_energy, out_cross):
    for pi in prange(ratios.shape[0]):
        uv = _realize_one(ratios[pi], theta, length3d, seg_idx, parent_idx,
                          pinned_mask, pinned_uv)
        cnt = _count_layout(uv, parent_idx, cap_rad)
        quad = 0.0
        for m in range(ratios.shape[1]):
            quad += wl[m] * ratios[pi, m, 0] ** 2 + wa[m] * ratios[pi, m, 1] ** 2
        out_energy[pi] = quad + wx * 2.0 * cnt  # each crossing hits both segments
        out_cross[pi] = cnt


@dataclass
class _Problem:
    """Kernel-ready arrays; node index order is BFS (root at 0)."""

    ids: list[int]
    index: dict[int, int]
    parent_idx: np.ndarray
    theta: np.ndarray
    length3d: np.ndarray
    seg_idx: np.ndarray
    cap_rad: np.ndarray
    n_segments: int


def _build_problem(tree: SkeletonTree, segments: list[Segment],
                   targets: TargetAngles) -> _Problem:
    ids = tree.ids_topo()
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    parent_idx = np.full(n, -1, dtype=np.int64)
    theta = np.zeros(n)
    length3d = np.zeros(n)
    seg_idx = np.full(n, -1, dtype=np.int64)
    cap = np.zeros(n)
    seg_of = segment_of_node(segments)
    for i, nid in enumerate(ids):
        node = tree.nodes[nid]
        if node.parent is None:
            continue
        parent_idx[i] = index[node.parent]
        theta[i] = targets.per_node[nid]
        length3d[i] = tree.edge_length(nid)
        seg_idx[i] = seg_of[nid]
        cap[i] = max(node.radius, tree.nodes[node.parent].radius)
    return _Problem(ids=ids, index=index, parent_idx=parent_idx, theta=theta,
                    length3d=length3d, seg_idx=seg_idx, cap_rad=cap,
                    n_segments=len(segments))


@dataclass
class PinnedSegment:
    """A segment frozen by an interactive edit: absolute layout coordinates
    per node plus its fixed ratio pair."""

    segment_index: int
    uv: dict[int, np.ndarray]
    ratios: tuple[float, float]


def _pin_arrays(problem: _Problem, pinned: dict[int, PinnedSegment] | None
                ) -> tuple[np.ndarray, np.ndarray]:
    n = len(problem.ids)
    mask = np.zeros(n, dtype=np.bool_)
    uv = np.zeros((n, 2))
    for pin in (pinned or {}).values():
        for nid, pos in pin.uv.items():
            i = problem.index[nid]
            mask[i] = True
            uv[i] = pos
    return mask, uv


def clamp_ratios(ratios: np.ndarray) -> np.ndarray:
    out = np.array(ratios, dtype=np.float64)
    out[..., 0] = np.clip(out[..., 0], RL_MIN, RL_MAX)
    out[..., 1] = np.clip(out[..., 1], RA_MIN, RA_MAX)
    return out


@dataclass
class EnergyWeights:
    """Weights of the embedding energy; `w_x="auto"` resolves to 1.5 times
    the largest possible quadratic total so one crossing always outweighs any
    crossing-free candidate."""

    w_l: float = 2.0
    w_a: float = 2.0
    w_x: float | str = "auto"
    per_segment: dict[int, tuple[float, float]] | None = None

    def resolve(self, n_segments: int) -> tuple[np.ndarray, np.ndarray, float]:
        wl = np.full(n_segments, float(self.w_l))
        wa = np.full(n_segments, float(self.w_a))
        for idx, (l, a) in (self.per_segment or {}).items():
            wl[idx] = l
            wa[idx] = a
        if self.w_x == "auto":
            wx = 1.5 * float(np.sum(4.0 * wl + wa))
        else:
            wx = float(self.w_x)
        return wl, wa, wx


@dataclass
class SolveConfig:
    particles: int = 40960
    c_max: int = 100
    omega_g: float = 0.05
    omega_p: float = 0.05
    omega_inert: float = 0.0375
    seed: int = 0
    epsilon: float = 1e-9  # "zero energy" termination tolerance


@dataclass
class EmbeddingSolution:
    uv: dict[int, np.ndarray]
    ratios: np.ndarray  # (M, 2)
    energy: float
    crossings: int
    iterations: int
    seed: int
    from_radial_fallback: bool = False


def realize_layout(tree: SkeletonTree, segments: list[Segment],
                   targets: TargetAngles, ratios: np.ndarray,
                   pinned: dict[int, PinnedSegment] | None = None
                   ) -> dict[int, np.ndarray]:
    """Forward-kinematic node placement: root at the origin, each node at
    parent + (1 + r_l) * l along the parent->grandparent ray rotated by the
    adjusted angle; pinned segments keep their stored coordinates."""
    problem = _build_problem(tree, segments, targets)
    mask, pin_uv = _pin_arrays(problem, pinned)
    uv = _realize_one(np.asarray(ratios, dtype=np.float64), problem.theta,
                      problem.length3d, problem.seg_idx, problem.parent_idx,
                      mask, pin_uv)
    return {nid: uv[i].copy() for i, nid in enumerate(problem.ids)}


def embedding_energy(tree: SkeletonTree, segments: list[Segment],
                     targets: TargetAngles, ratios: np.ndarray,
                     weights: EnergyWeights | None = None,
                     pinned: dict[int, PinnedSegment] | None = None
                     ) -> tuple[float, int]:
    """(E_p, crossing pair count) of the realized layout for one ratio set."""
    weights = weights or EnergyWeights()
    problem = _build_problem(tree, segments, targets)
    mask, pin_uv = _pin_arrays(problem, pinned)
    wl, wa, wx = weights.resolve(problem.n_segments)
    e = np.zeros(1)
    x = np.zeros(1, dtype=np.int64)
    batch = clamp_ratios(np.asarray(ratios, dtype=np.float64))[None, :, :]
    _evaluate_batch(batch, problem.theta, problem.length3d, problem.seg_idx,
                    problem.parent_idx, problem.cap_rad, mask, pin_uv,
                    wl, wa, wx, e, x)
    return float(e[0]), int(x[0])


def _invert_adjust(theta_t: float, theta_r: float) -> float:
    """r_a that maps target theta_t closest to realized theta_r under the
    blend formula, clamped to bounds (realized values on the far side of pi
    are unreachable and clamp to the nearest extreme)."""
    if theta_t <= PI:
        if theta_r >= theta_t:
            ra = (theta_r - theta_t) / (PI - theta_t) if PI > theta_t else 0.0
        else:
            ra = theta_r / theta_t - 1.0 if theta_t > 0.0 else 0.0
    else:
        if theta_r <= theta_t:
            ra = (theta_t - theta_r) / (theta_t - PI)
        else:
            ra = -(theta_r - theta_t) / (TWO_PI - theta_t) if TWO_PI > theta_t else 0.0
    return float(np.clip(ra, RA_MIN, RA_MAX))


def radial_seed(tree: SkeletonTree, segments: list[Segment],
                targets: TargetAngles) -> tuple[dict[int, np.ndarray], np.ndarray]:
    """Crossing-free radial layout plus its approximate ratio set.

    Subtrees take disjoint angular wedges proportional to leaf counts; each
    node sits one original edge length from its parent along its wedge
    bisector. The returned ratios invert the angle blend per node against the
    realized radial angles and average per segment (lengths are exact, so the
    length column is zero)."""
    leaf_count: dict[int, int] = {}
    for nid in reversed(tree.ids_topo()):
        kids = tree.nodes[nid].children
        leaf_count[nid] = 1 if not kids else sum(leaf_count[c] for c in kids)
    uv: dict[int, np.ndarray] = {tree.root_id: np.zeros(2)}
    stack: list[tuple[int, float, float]] = [(tree.root_id, 0.0, TWO_PI)]
    while stack:
        nid, lo, hi = stack.pop()
        kids = tree.nodes[nid].children
        if not kids:
            continue
        total = sum(leaf_count[c] for c in kids)
        acc = lo
        for c in kids:
            span = (hi - lo) * leaf_count[c] / total
            mid = acc + 0.5 * span
            direction = np.array([math.cos(mid), math.sin(mid)])
            uv[c] = uv[nid] + tree.edge_length(c) * direction
            stack.append((c, acc, acc + span))
            acc += span

    ratios = np.zeros((len(segments), 2))
    for seg in segments:
        values = []
        for nid in seg.node_ids:
            p = tree.nodes[nid].parent
            gp = tree.nodes[p].parent
            g_uv = uv[gp] if gp is not None else uv[p] + np.array([0.0, -1.0])
            theta_r = ccw_angle(g_uv - uv[p], uv[nid] - uv[p])
            values.append(_invert_adjust(targets.per_node[nid], theta_r))
        ratios[seg.index, 1] = float(np.clip(np.mean(values), RA_MIN, RA_MAX))
    return uv, ratios


def solve(tree: SkeletonTree, segments: list[Segment], targets: TargetAngles,
          weights: EnergyWeights | None = None,
          config: SolveConfig | None = None,
          pinned: dict[int, PinnedSegment] | None = None,
          progress=None) -> EmbeddingSolution:
    """Swarm-optimize the ratio set (pinned segments stay frozen).

    Deterministic for a fixed (seed, inputs): particle evaluations are
    independent, the global best breaks ties by lowest particle index, and
    all randomness flows from the one seeded generator. Unpinned solves fall
    back to the radial layout whenever the swarm's best crossing-free energy
    does not beat it, so the result is crossing-free with E_p no worse than
    the radial seed. Pinned solves return the minimal-(crossings, energy)
    candidate instead, which may report residual crossings.

    `progress(c, best_energy)` fires once per iteration.
    """
    weights = weights or EnergyWeights()
    config = config or SolveConfig()
    problem = _build_problem(tree, segments, targets)
    mask, pin_uv = _pin_arrays(problem, pinned)
    m = problem.n_segments
    wl, wa, wx = weights.resolve(m)
    rng = np.random.default_rng(config.seed)

    n_particles = max(2, config.particles)
    ratios = np.empty((n_particles, m, 2))
    ratios[:, :, 0] = rng.uniform(RL_MIN, RL_MAX, size=(n_particles, m))
    ratios[:, :, 1] = rng.uniform(RA_MIN, RA_MAX, size=(n_particles, m))
    ratios[0] = 0.0
    radial_uv, radial_ratios = radial_seed(tree, segments, targets)
    ratios[1] = radial_ratios

    frozen = np.zeros(m, dtype=np.bool_)
    frozen_values = np.zeros((m, 2))
    for pin in (pinned or {}).values():
        frozen[pin.segment_index] = True
        frozen_values[pin.segment_index] = pin.ratios
    if frozen.any():
        ratios[:, frozen, :] = frozen_values[frozen]

    velocity = np.zeros_like(ratios)
    energies = np.empty(n_particles)
    cross_counts = np.empty(n_particles, dtype=np.int64)

    def evaluate(batch):
        _evaluate_batch(batch, problem.theta, problem.length3d, problem.seg_idx,
                        problem.parent_idx, problem.cap_rad, mask, pin_uv,
                        wl, wa, wx, energies, cross_counts)

    pbest_ratios = ratios.copy()
    pbest_energy = np.full(n_particles, np.inf)
    best_ratios = None
    best_energy = math.inf
    best_cross = np.iinfo(np.int64).max
    iterations = 0

    for c in range(1, config.c_max + 1):
        evaluate(ratios)
        improved = energies < pbest_energy
        pbest_energy[improved] = energies[improved]
        pbest_ratios[improved] = ratios[improved]
        # lexicographic (crossings, energy, particle index) candidate
        cmin = int(cross_counts.min())
        sel = np.flatnonzero(cross_counts == cmin)
        local = sel[int(np.argmin(energies[sel]))]
        if (cross_counts[local], energies[local]) < (best_cross, best_energy):
            best_cross = int(cross_counts[local])
            best_energy = float(energies[local])
            best_ratios = ratios[local].copy()
        iterations = c
        g_idx = int(np.argmin(pbest_energy))
        if progress is not None:
            progress(c, float(pbest_energy[g_idx]))
        if pbest_energy[g_idx] <= config.epsilon or c == config.c_max:
            break
        gbest = pbest_ratios[g_idx]
        gamma = rng.uniform(-0.05, 0.05, size=ratios.shape)
        step = (config.omega_g * (gbest[None, :, :] - ratios)
                + config.omega_p * (pbest_ratios - ratios)
                + config.omega_inert * (velocity + gamma))
        new_ratios = clamp_ratios(ratios + step)
        if frozen.any():
            new_ratios[:, frozen, :] = frozen_values[frozen]
        velocity = new_ratios - ratios
        ratios = new_ratios

    chosen = (best_cross, best_energy, best_ratios, None)
    if not pinned:
        # the fallback candidate is the radial layout itself (its inverted
        # ratio set only approximates it), so score those coordinates
        radial_arr = np.empty((len(problem.ids), 2))
        for i, nid in enumerate(problem.ids):
            radial_arr[i] = radial_uv[nid]
        radial_cross = int(_count_layout(radial_arr, problem.parent_idx,
                                         problem.cap_rad))
        radial_energy = float(np.sum(wl * radial_ratios[:, 0] ** 2
                                     + wa * radial_ratios[:, 1] ** 2)
                              + wx * 2.0 * radial_cross)
        radial_cand = (radial_cross, radial_energy, radial_ratios, radial_uv)
        if (radial_cand[0], radial_cand[1]) < (chosen[0], chosen[1]):
            chosen = radial_cand
    sel_cross, sel_energy, sel_ratios, sel_uv = chosen

    if sel_uv is None:
        uv_arr = _realize_one(sel_ratios, problem.theta, problem.length3d,
                              problem.seg_idx, problem.parent_idx, mask, pin_uv)
        uv = {nid: uv_arr[i].copy() for i, nid in enumerate(problem.ids)}
        from_radial = False
    else:
        uv = {nid: v.copy() for nid, v in sel_uv.items()}
        from_radial = True
    return EmbeddingSolution(uv=uv, ratios=sel_ratios.copy(), energy=sel_energy,
                             crossings=sel_cross, iterations=iterations,
                             seed=config.seed, from_radial_fallback=from_radial)


def apply_edit(tree: SkeletonTree, segments: list[Segment], targets: TargetAngles,
               solution: EmbeddingSolution, segment_id: int, anchor_node_id: int,
               rotation: float, weights: EnergyWeights | None = None,
               config: SolveConfig | None = None,
               pinned: dict[int, PinnedSegment] | None = None
               ) -> tuple[EmbeddingSolution, dict[int, PinnedSegment]]:
    """Rigidly rotate a segment (descendants follow) about an anchor node and
    pin it, then remove any crossings the edit introduced by re-solving the
    remaining segments only. Returns the new solution plus the accumulated
    pin set. A zero rotation pins in place and leaves the solution untouched.
    """
    if not 0 <= segment_id < len(segments):
        raise EditError(f"unknown segment {segment_id}")
    seg = segments[segment_id]
    attachment = tree.nodes[seg.first].parent
    if anchor_node_id not in seg.node_ids and anchor_node_id != attachment:
        raise EditError(
            f"anchor {anchor_node_id} is not on segment {segment_id} or its attachment")
    config = config or SolveConfig()
    weights = weights or EnergyWeights()

    anchor = solution.uv[anchor_node_id]
    if rotation == 0.0:
        pin_uv = {nid: solution.uv[nid].copy() for nid in seg.node_ids}
    else:
        c, s = math.cos(rotation), math.sin(rotation)
        rot = np.array([[c, -s], [s, c]])
        pin_uv = {nid: rot @ (solution.uv[nid] - anchor) + anchor
                  for nid in seg.node_ids}
    pins = dict(pinned or {})
    pins[segment_id] = PinnedSegment(segment_index=segment_id, uv=pin_uv,
                                     ratios=(float(solution.ratios[segment_id, 0]),
                                             float(solution.ratios[segment_id, 1])))
    if rotation == 0.0:
        return solution, pins

    uv = realize_layout(tree, segments, targets, solution.ratios, pins)
    energy, crossings = embedding_energy(tree, segments, targets,
                                         solution.ratios, weights, pins)
    if crossings == 0:
        moved = EmbeddingSolution(uv=uv, ratios=solution.ratios.copy(),
                                  energy=energy, crossings=0, iterations=0,
                                  seed=config.seed)
        return moved, pins
    return solve(tree, segments, targets, weights, config, pins), pins


def solution_to_json(solution: EmbeddingSolution) -> dict:
    return {
        "uv": {str(nid): [float(solution.uv[nid][0]), float(solution.uv[nid][1])]
               for nid in solution.uv},
        "ratios": [[float(r[0]), float(r[1])] for r in solution.ratios],
        "energy": float(solution.energy),
        "crossings": int(solution.crossings),
        "iterations": int(solution.iterations),
        "seed": int(solution.seed),
    }
