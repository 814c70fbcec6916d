"""Shared tree builders and pipeline helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from treeplan.embedding import EnergyWeights, SolveConfig
from treeplan.pipeline import PipelineState, prepare
from treeplan.skeleton import SkeletonNode, SkeletonTree
from treeplan.viewpoint import ViewSearchConfig


def make_tree(entries) -> SkeletonTree:
    """entries: (id, (x, y, z), radius, parent-or-None) in child order."""
    nodes = {}
    root_id = None
    for nid, pos, radius, parent in entries:
        nodes[nid] = SkeletonNode(id=nid, position=np.asarray(pos, dtype=float),
                                  radius=float(radius), parent=parent)
        if parent is None:
            root_id = nid
    for nid, n in nodes.items():
        if n.parent is not None:
            nodes[n.parent].children.append(nid)
    return SkeletonTree(nodes=nodes, root_id=root_id)


def path_tree(n: int, step=(0.0, 1.0, 0.0), radius=0.05) -> SkeletonTree:
    entries = [(1, (0.0, 0.0, 0.0), radius, None)]
    pos = np.zeros(3)
    for i in range(2, n + 1):
        pos = pos + np.asarray(step)
        entries.append((i, tuple(pos), radius, i - 1))
    return make_tree(entries)


def star_tree(k: int, radius=0.02) -> SkeletonTree:
    entries = [(1, (0.0, 0.0, 0.0), radius, None)]
    for i in range(k):
        ang = 2.0 * math.pi * i / k
        entries.append((i + 2, (math.cos(ang), math.sin(ang), 0.0), radius, 1))
    return make_tree(entries)


def y_tree(radius=0.05) -> SkeletonTree:
    """root-a-b with b branching into chain c-d and leaf e (3 segments)."""
    return make_tree([
        (1, (0.0, 0.0, 0.0), radius, None),
        (2, (0.0, 1.0, 0.0), radius, 1),
        (3, (0.0, 2.0, 0.0), radius, 2),
        (4, (-0.8, 2.8, 0.3), radius, 3),
        (5, (-1.6, 3.6, 0.5), radius, 4),
        (6, (0.8, 2.9, -0.4), radius, 3),
    ])


def planar_tree(radius=0.03) -> SkeletonTree:
    """Strictly planar (z = 0), wide open angles, no self-occlusion."""
    return make_tree([
        (1, (0.0, 0.0, 0.0), radius, None),
        (2, (0.0, 1.0, 0.0), radius, 1),
        (3, (0.0, 2.0, 0.0), radius, 2),
        (4, (-1.2, 3.0, 0.0), radius, 3),
        (5, (-2.0, 4.2, 0.0), radius, 4),
        (6, (1.2, 3.1, 0.0), radius, 3),
        (7, (2.0, 4.3, 0.0), radius, 6),
        (8, (2.9, 4.9, 0.0), radius, 7),
    ])


def random_tree(rng: np.random.Generator, n_nodes: int, radius=0.01,
                branch_prob: float = 0.35) -> SkeletonTree:
    """Random tree with unit-ish edge lengths; never degenerate."""
    entries = [(1, (0.0, 0.0, 0.0), radius, None)]
    positions = {1: np.zeros(3)}
    frontier = [1]
    nid = 2
    while nid <= n_nodes:
        parent = int(frontier[rng.integers(len(frontier))])
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        length = rng.uniform(0.5, 1.5)
        pos = positions[parent] + length * direction
        positions[nid] = pos
        entries.append((nid, tuple(pos), radius, parent))
        if rng.random() > branch_prob:
            frontier = [f for f in frontier if f != parent]
        frontier.append(nid)
        if not frontier:
            frontier = [nid]
        nid += 1
    return make_tree(entries)


FAST_VIEW = ViewSearchConfig(particles=96, iterations=25, seed=3)
FAST_SOLVE = SolveConfig(particles=128, c_max=40, seed=0)


@pytest.fixture(scope="session")
def y_state() -> PipelineState:
    return prepare(y_tree(), FAST_VIEW)


@pytest.fixture(scope="session")
def planar_state() -> PipelineState:
    return prepare(planar_tree(), FAST_VIEW)


def default_weights() -> EnergyWeights:
    return EnergyWeights()
