#!/usr/bin/env python3
"""Generate the bundled skeleton fixtures (deterministic).

Writes fixtures/*.swc (+ ytree.json) and prints a verification table:
node/segment counts, crossings of the identity realization, crossings of the
radial layout, and the solved embedding's crossings. The occluder fixture is
searched so that its identity realization genuinely crosses while the solver
still reaches a crossing-free result.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from treeplan.crossing import count_crossings
from treeplan.embedding import EnergyWeights, SolveConfig, radial_seed, solve
from treeplan.pipeline import prepare
from treeplan.skeleton import SkeletonNode, SkeletonTree, serialize_json, serialize_swc
from treeplan.viewpoint import ViewSearchConfig

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def tree_from(entries):
    nodes = {}
    root = None
    for nid, pos, radius, parent in entries:
        nodes[nid] = SkeletonNode(id=nid, position=np.asarray(pos, float),
                                  radius=float(radius), parent=parent)
        if parent is None:
            root = nid
    for nid, n in nodes.items():
        if n.parent is not None:
            nodes[n.parent].children.append(nid)
    return SkeletonTree(nodes=nodes, root_id=root)


def ytree():
    return tree_from([
        (1, (0.0, 0.0, 0.0), 0.05, None),
        (2, (0.0, 1.0, 0.0), 0.05, 1),
        (3, (0.0, 2.0, 0.0), 0.05, 2),
        (4, (-0.8, 2.8, 0.3), 0.05, 3),
        (5, (-1.6, 3.6, 0.5), 0.05, 4),
        (6, (0.8, 2.9, -0.4), 0.05, 3),
    ])


def planar_fan():
    """Strictly planar (z = 0), wide angles, two branching levels."""
    entries = [(1, (0.0, 0.0, 0.0), 0.03, None), (2, (0.0, 1.0, 0.0), 0.03, 1)]
    nid = 3
    trunk_top = 2
    arms = [(-1.1, 0.9), (-0.35, 1.15), (0.35, 1.15), (1.1, 0.9)]
    for ax, ay in arms:
        base = np.array([0.0, 1.0])
        tip = base + np.array([ax, ay])
        entries.append((nid, (tip[0], tip[1], 0.0), 0.03, trunk_top))
        arm_id = nid
        nid += 1
        d = np.array([ax, ay]) / math.hypot(ax, ay)
        left = tip + 0.9 * _rot2(d, 0.5)
        right = tip + 0.9 * _rot2(d, -0.5)
        entries.append((nid, (left[0], left[1], 0.0), 0.03, arm_id))
        nid += 1
        entries.append((nid, (right[0], right[1], 0.0), 0.03, arm_id))
        nid += 1
    return tree_from(entries)


def _rot2(v, ang):
    c, s = math.cos(ang), math.sin(ang)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def helix():
    """Helical trunk with alternating outward side branches."""
    entries = [(1, (0.0, 0.0, 0.0), 0.05, None)]
    nid = 2
    prev = 1
    for k in range(1, 13):
        ang = 0.55 * k
        pos = (1.6 * math.cos(ang), 1.6 * math.sin(ang), 0.45 * k)
        entries.append((nid, pos, 0.05, prev))
        prev = nid
        nid += 1
        if k % 2 == 0:
            out = np.array([math.cos(ang), math.sin(ang), 0.0])
            base = np.asarray(pos)
            e1 = base + 1.0 * out + np.array([0, 0, 0.3])
            e2 = e1 + 0.9 * out + np.array([0, 0, -0.2])
            entries.append((nid, tuple(e1), 0.04, prev))
            entries.append((nid + 1, tuple(e2), 0.04, nid))
            nid += 2
    return tree_from(entries)


def bush(seed=14, n=72):
    rng = np.random.default_rng(seed)
    entries = [(1, (0.0, 0.0, 0.0), 0.03, None)]
    positions = {1: np.zeros(3)}
    dirs = {1: np.array([0.0, 0.0, 1.0])}
    frontier = [1]
    nid = 2
    while nid <= n and frontier:
        parent = frontier[int(rng.integers(len(frontier)))]
        d = dirs[parent] + 0.7 * rng.normal(size=3)
        d /= np.linalg.norm(d)
        length = rng.uniform(0.8, 1.6)
        pos = positions[parent] + length * d
        positions[nid] = pos
        dirs[nid] = d
        entries.append((nid, tuple(pos), 0.03, parent))
        if rng.random() < 0.55:
            frontier.remove(parent)
        frontier.append(nid)
        nid += 1
    return tree_from(entries)


def broom(seed=5):
    """Long trunk, then repeated fan-outs: ~60 segments."""
    rng = np.random.default_rng(seed)
    entries = [(1, (0.0, 0.0, 0.0), 0.02, None)]
    nid = 2
    prev = 1
    for k in range(1, 6):
        entries.append((nid, (0.12 * k, 0.05 * k, 1.0 * k), 0.02, prev))
        prev = nid
        nid += 1
    tips = [(prev, np.array([0.6, 0.25, 5.0]), np.array([0.0, 0.0, 1.0]))]
    for level in range(4):
        next_tips = []
        for parent, base, axis in tips:
            fan = 4 if level == 0 else 2
            for j in range(fan):
                phi = 2 * math.pi * j / fan + 0.4 * level + rng.uniform(-0.1, 0.1)
                tilt = 0.55 + 0.15 * rng.uniform(-1, 1)
                side = np.array([math.cos(phi), math.sin(phi), 0.0])
                d = math.sin(tilt) * side + math.cos(tilt) * axis
                d /= np.linalg.norm(d)
                chain = base.copy()
                chain_parent = parent
                for step in range(2):
                    chain = chain + (1.1 - 0.2 * step) * d
                    entries.append((nid, tuple(chain), 0.02, chain_parent))
                    chain_parent = nid
                    nid += 1
                next_tips.append((chain_parent, chain, d))
        tips = next_tips
    return tree_from(entries)


def occluder_candidate(seed):
    """Small 3D tree candidate for the identity-crossing fixture."""
    rng = np.random.default_rng(seed)
    entries = [(1, (0.0, 0.0, 0.0), 0.06, None),
               (2, (0.0, 0.0, 1.0), 0.06, 1)]
    nid = 3
    for arm in range(3):
        phi = 2 * math.pi * arm / 3 + rng.uniform(-0.4, 0.4)
        d = np.array([math.cos(phi), math.sin(phi), rng.uniform(-0.3, 0.9)])
        d /= np.linalg.norm(d)
        base = np.array([0.0, 0.0, 1.0])
        chain_parent = 2
        pos = base
        for step in range(3):
            bend = rng.normal(scale=0.45, size=3)
            d = d + bend
            d /= np.linalg.norm(d)
            pos = pos + rng.uniform(0.7, 1.2) * d
            entries.append((nid, tuple(pos), 0.06, chain_parent))
            chain_parent = nid
            nid += 1
    return tree_from(entries)


def neuron(seed=119, budget=230):
    """Procedural traced-neuron morphology: persistent directions, tapering
    radii, stochastic bifurcations, slice-like z compression."""
    rng = np.random.default_rng(seed)
    zsquash = 0.3
    entries = [(1, (0.0, 0.0, 0.0), 1.5, None)]
    d0 = np.array([0.0, 1.0, 0.15])
    d0 /= np.linalg.norm(d0)
    # (parent id, position, direction, radius, depth)
    stack = [(1, np.zeros(3), d0, 1.2, 0)]
    nid = 2
    while stack and nid <= budget:
        parent, pos, d, radius, depth = stack.pop(0)
        steps = int(rng.integers(3, 7))
        for _ in range(steps):
            if nid > budget:
                break
            d = d + 0.18 * rng.normal(size=3) * np.array([1.0, 1.0, zsquash])
            d /= np.linalg.norm(d)
            pos = pos + rng.uniform(6.0, 12.0) * d
            entries.append((nid, tuple(pos), max(radius, 0.3), parent))
            parent = nid
            nid += 1
        if nid > budget:
            break
        if depth < 5 and rng.random() < 0.9:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            perp = np.cross(d, axis)
            perp /= np.linalg.norm(perp)
            spread = rng.uniform(0.5, 0.9)
            for sign in (1.0, -1.0):
                child_dir = math.cos(spread) * d + math.sin(spread) * sign * perp
                child_dir[2] *= zsquash
                child_dir /= np.linalg.norm(child_dir)
                stack.append((parent, pos, child_dir, radius * 0.8, depth + 1))
    return tree_from(entries)


def verify(name, tree, particles=1024, c_max=60):
    state = prepare(tree, ViewSearchConfig(particles=192, iterations=40, seed=0))
    segs = state.segments
    m = len(segs)
    identity = np.zeros((m, 2))
    from treeplan.embedding import realize_layout
    uv0 = realize_layout(tree, segs, state.targets, identity)
    x0 = count_crossings(uv0, tree, segments=segs)[0]
    radial_uv, _ = radial_seed(tree, segs, state.targets)
    xr = count_crossings(radial_uv, tree, segments=segs)[0]
    sol = solve(tree, segs, state.targets, EnergyWeights(),
                SolveConfig(particles=particles, c_max=c_max, seed=0))
    print(f"{name:<14} nodes={len(tree):<4} segments={m:<3} identityX={x0:<3} "
          f"radialX={xr:<2} solvedX={sol.crossings} E={sol.energy:.4g} "
          f"fallback={sol.from_radial_fallback}")
    return x0, xr, sol


def main():
    OUT.mkdir(exist_ok=True)
    fixtures = {
        "ytree": ytree(),
        "planar_fan": planar_fan(),
        "helix": helix(),
        "bush": bush(),
        "broom": broom(),
        "neuron": neuron(),
    }
    # search for an occluder whose identity layout crosses but still solves
    for seed in range(200):
        cand = occluder_candidate(seed)
        state = prepare(cand, ViewSearchConfig(particles=192, iterations=40, seed=0))
        from treeplan.embedding import realize_layout
        uv0 = realize_layout(cand, state.segments, state.targets,
                             np.zeros((len(state.segments), 2)))
        x0 = count_crossings(uv0, cand, segments=state.segments)[0]
        radial_uv, _ = radial_seed(cand, state.segments, state.targets)
        xr = count_crossings(radial_uv, cand, segments=state.segments)[0]
        if x0 > 0 and xr == 0:
            sol = solve(cand, state.segments, state.targets, EnergyWeights(),
                        SolveConfig(particles=2048, c_max=100, seed=0))
            if sol.crossings == 0:
                print(f"occluder: seed {seed} identityX={x0}")
                fixtures["occluder"] = cand
                break
    else:
        raise SystemExit("no occluder candidate found")

    for name, tree in fixtures.items():
        verify(name, tree)
        (OUT / f"{name}.swc").write_text(serialize_swc(tree))
    (OUT / "ytree.json").write_text(serialize_json(fixtures["ytree"]))
    print(f"wrote {len(fixtures)} fixtures to {OUT}")


if __name__ == "__main__":
    main()
