"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The embedding runs go
through the CLI at 4,096 particles per fixture; slower criteria reuse those
runs via the session-scoped fixture.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from treeplan.cli import main
from treeplan.crossing import count_crossings
from treeplan.embedding import EnergyWeights, SolveConfig, adjust_angle, solve
from treeplan.navigation import PathConfig, build_path, build_phases, dolly_arc
from treeplan.pipeline import load_tree, prepare
from treeplan.projection import TargetAngles
from treeplan.skeleton import EnhancedTree, build_enhanced_tree, segment_tree
from treeplan.viewpoint import (CameraPose, filtered_edges,
                                information_batch, view_information)

from conftest import make_tree, random_tree
from test_embedding import (forward_kinematics, grid_oracle_minimum,
                            naive_crossing_count, occluding_two_segment_tree,
                            radial_candidate_energy)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIXTURE_NAMES = ["ytree", "planar_fan", "helix", "bush", "broom", "occluder", "neuron"]
PARTICLES = 4096
PI = math.pi


def ok(name: str, detail: str = ""):
    print(f"PASS  {name}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def embed_runs(tmp_path_factory):
    """cmd_embed on every bundled fixture at 4,096 particles."""
    runs = {}
    for name in FIXTURE_NAMES:
        out = tmp_path_factory.mktemp(f"embed_{name}")
        t0 = time.time()
        code = main(["embed", "--input", str(FIXTURES / f"{name}.swc"),
                     "--out-dir", str(out), "--particles", str(PARTICLES),
                     "--seed", "0"])
        seconds = time.time() - t0
        runs[name] = {
            "code": code,
            "seconds": seconds,
            "out": out,
            "embedding": json.loads((out / "embedding.json").read_text()),
            "report": json.loads((out / "report.json").read_text()),
        }
    return runs


@pytest.fixture(scope="session")
def states():
    """Prepared pipeline state (views + targets) per fixture."""
    return {name: prepare(load_tree(FIXTURES / f"{name}.swc"))
            for name in FIXTURE_NAMES}


def test_fixture_inventory():
    seg_counts = {}
    for name in FIXTURE_NAMES:
        tree = load_tree(FIXTURES / f"{name}.swc")
        seg_counts[name] = len(segment_tree(tree))
        if name == "neuron":
            assert len(tree) <= 250
    synthetic = [n for n in FIXTURE_NAMES if n != "neuron"]
    assert len(synthetic) >= 6
    assert min(seg_counts[n] for n in synthetic) == 3
    assert max(seg_counts[n] for n in synthetic) >= 55
    ok("fixture inventory", f"segments {sorted(seg_counts.values())}")


def test_crossing_free_guarantee(embed_runs):
    for name, run in embed_runs.items():
        assert run["code"] == 0, f"{name} exited {run['code']}"
        assert run["report"]["crossings"] == 0, f"{name} reports crossings"
        assert run["embedding"]["crossings"] == 0
        assert run["seconds"] <= 120.0, f"{name} took {run['seconds']:.1f}s"
    worst = max(run["seconds"] for run in embed_runs.values())
    ok("crossing-free guarantee", f"7 fixtures, worst {worst:.1f}s at {PARTICLES} particles")


def test_no_worse_than_radial(states):
    weights = EnergyWeights()
    checked = 0
    for name, st in states.items():
        radial_energy, _ = radial_candidate_energy(st.tree, st.segments,
                                                   st.targets, weights)
        for seed in range(5):
            energies = []
            sol = solve(st.tree, st.segments, st.targets, weights,
                        SolveConfig(particles=256, c_max=10, seed=seed),
                        progress=lambda c, e: energies.append(e))
            assert sol.energy <= radial_energy, (name, seed)
            assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))
            checked += 1
    ok("no-worse-than-radial", f"{checked} runs (7 fixtures x 5 seeds)")


def test_planar_recovery_identity(states, embed_runs):
    st = states["planar_fan"]
    for entry in st.views.entries:
        assert entry.energy <= 1e-6, f"view energy {entry.energy}"
    rep = embed_runs["planar_fan"]["report"]
    assert rep["metric1"]["L_l"] <= 1e-9 and rep["metric1"]["L_a"] <= 1e-9
    assert rep["metric2"]["L_l"] <= 1e-9 and rep["metric2"]["L_a"] <= 1e-9
    assert embed_runs["planar_fan"]["embedding"]["energy"] <= 1e-9
    ok("planar-recovery identity")


def curling_single_segment_tree():
    """One segment whose identity target angles self-intersect."""
    entries = [(1, (0.0, 0.0, 0.0), 0.05, None)]
    for i in range(2, 9):
        entries.append((i, (0.0, float(i - 1), 0.0), 0.05, i - 1))
    tree = make_tree(entries)
    theta = 0.62 * PI
    targets = TargetAngles(per_node={i: (PI if i == 2 else theta) for i in range(2, 9)})
    return tree, segment_tree(tree), targets


def test_oracle_equivalence_tiny_trees():
    cases = [("1-segment curl", curling_single_segment_tree()),
             ("2-segment occluder", occluding_two_segment_tree())]
    for label, (tree, segs, targets) in cases:
        assert len(segs) <= 3
        weights = EnergyWeights()
        base = forward_kinematics(tree, segs, targets, np.zeros((len(segs), 2)))
        assert naive_crossing_count(base, tree) > 0, f"{label}: identity must cross"
        t0 = time.time()
        oracle = grid_oracle_minimum(tree, segs, targets, weights, step=0.01)
        oracle_seconds = time.time() - t0
        assert oracle_seconds <= 60.0
        sol = solve(tree, segs, targets, weights,
                    SolveConfig(particles=PARTICLES, c_max=1500, seed=0))
        assert sol.crossings == 0
        assert sol.energy <= 1.05 * oracle + 1e-12, \
            f"{label}: {sol.energy} vs oracle {oracle}"
        ok("oracle equivalence", f"{label}: solver {sol.energy:.5f} <= "
                                 f"1.05 x {oracle:.5f} (oracle {oracle_seconds:.1f}s)")


def test_angle_blend_property_suite():
    rng = np.random.default_rng(123)
    n = 100_000
    theta = rng.uniform(0.0, 2 * PI, n)
    ra = rng.uniform(-1.0, 1.0, n)
    violations = 0
    for t, r in zip(theta, ra):
        out = adjust_angle(t, r)
        if t <= PI:
            if not (-1e-12 <= out <= PI + 1e-12):
                violations += 1
        else:
            if not (PI - 1e-12 <= out <= 2 * PI + 1e-12):
                violations += 1
    for t in rng.uniform(0.0, 2 * PI, 1000):
        if abs(adjust_angle(t, 0.0) - t) > 1e-12:
            violations += 1
    assert violations == 0
    ok("bending-direction property suite", f"{n} samples, 0 violations")


def test_pso_sanity_determinism(tmp_path, states):
    args = ["embed", "--input", str(FIXTURES / "ytree.swc"),
            "--particles", "512", "--cmax", "40", "--seed", "42"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out-dir", str(out_a)]) == 0
    assert main(args + ["--out-dir", str(out_b)]) == 0
    assert (out_a / "embedding.json").read_bytes() == (out_b / "embedding.json").read_bytes()

    st = states["occluder"]
    energies = []
    solve(st.tree, st.segments, st.targets,
          config=SolveConfig(particles=512, c_max=60, seed=11),
          progress=lambda c, e: energies.append(e))
    assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))
    ok("PSO sanity", "byte-identical reruns; best energy non-increasing")


def test_view_metric_suite():
    # hand-computed two-edge fixture: exactly 1 bit
    tree = make_tree([(1, (0, 0, 0), 0.0, None), (2, (1, 0, 0), 0.0, 1),
                      (3, (1, 1, 0), 0.0, 2)])
    et = EnhancedTree(base=tree, imaginary_edges=[])
    pose = CameraPose(position=np.array([6.0, 0.5, 0.0]),
                      look_at=np.array([0.0, 0.5, 0.0]),
                      up=np.array([0.0, 0.0, 1.0]))
    assert view_information(pose, et) == pytest.approx(1.0, abs=1e-9)

    # non-negativity over 10^4 random (tree, view) pairs
    rng = np.random.default_rng(55)
    pairs = 0
    minimum = np.inf
    while pairs < 10_000:
        tree = random_tree(rng, int(rng.integers(2, 20)))
        et = build_enhanced_tree(tree)
        vectors, lengths = filtered_edges(et)
        dirs = rng.normal(size=(100, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        values = information_batch(dirs, vectors, lengths)
        finite = values[np.isfinite(values)]
        assert np.all(finite >= 0.0)
        minimum = min(minimum, finite.min(initial=np.inf))
        pairs += len(finite)

    # invariance under uniform scale and joint rigid rotation
    tree = random_tree(np.random.default_rng(8), 14)
    et = build_enhanced_tree(tree)
    pose = CameraPose(position=np.array([4.0, -2.0, 3.0]),
                      look_at=np.array([0.2, 0.3, 0.1]),
                      up=None)
    look = pose.look_at - pose.position
    d = look / np.linalg.norm(look)
    up = np.array([0.0, 0.0, 1.0]) - d[2] * d
    pose.up = up / np.linalg.norm(up)
    base = view_information(pose, et)
    scaled_tree = make_tree([(nid, tuple(2.5 * n.position), n.radius, n.parent)
                             for nid, n in tree.nodes.items()])
    scaled_pose = CameraPose(position=2.5 * pose.position,
                             look_at=2.5 * pose.look_at, up=pose.up)
    assert view_information(scaled_pose, build_enhanced_tree(scaled_tree)) == \
        pytest.approx(base, abs=1e-9)
    a, b = 0.6, -1.1
    rot = np.array([[math.cos(a), -math.sin(a), 0],
                    [math.sin(a), math.cos(a), 0], [0, 0, 1.0]]) @ \
        np.array([[1.0, 0, 0], [0, math.cos(b), -math.sin(b)],
                  [0, math.sin(b), math.cos(b)]])
    rot_tree = make_tree([(nid, tuple(rot @ n.position), n.radius, n.parent)
                          for nid, n in tree.nodes.items()])
    rot_pose = CameraPose(position=rot @ pose.position, look_at=rot @ pose.look_at,
                          up=rot @ pose.up)
    assert view_information(rot_pose, build_enhanced_tree(rot_tree)) == \
        pytest.approx(base, abs=1e-9)
    ok("view metric suite", f"{pairs} pairs >= 0; 1.0-bit case; invariances")


def test_loss_magnitude_neuron(embed_runs):
    avg_la = embed_runs["neuron"]["report"]["metric1"]["avgL_a"]
    assert avg_la <= 0.05, f"neuron Avg L(a) = {avg_la}"
    ok("loss magnitude on neuron", f"Metric-1 Avg L(a) = {avg_la:.4f} <= 0.05")


def test_path_continuity(states):
    joins = 0
    for name, st in states.items():
        config = PathConfig(sample_rate=10.0)
        phases = build_phases(st.views, config)
        for a, b in zip(phases, phases[1:]):
            gap = np.linalg.norm(a.pose(1.0).position - b.pose(0.0).position)
            assert gap <= 1e-9, f"{name}: join gap {gap}"
            joins += 1
        for phase in phases:
            if phase.kind == "dolly":
                entry = phase.entry
                for t in np.linspace(0.0, 1.0, 7):
                    pose = dolly_arc(entry, float(t))
                    assert abs(np.linalg.norm(pose.position - entry.center)
                               - entry.search_radius) <= 1e-9
            else:
                np.testing.assert_allclose(phase.pose(0.0).position, phase.p0,
                                           atol=0)
                np.testing.assert_allclose(phase.pose(1.0).position, phase.p2,
                                           atol=0)
        path = build_path(st.views, config)
        assert all(np.all(np.isfinite(k.pose.position)) for k in path.keyframes)
    ok("path continuity", f"{joins} phase joins <= 1e-9 across 7 fixtures")


def test_crossing_counter_equivalence():
    rng = np.random.default_rng(31)
    layouts = 0
    while layouts < 1000:
        tree = random_tree(rng, int(rng.integers(4, 22)), radius=0.12)
        uv = {nid: rng.uniform(-2.5, 2.5, size=2) for nid in tree.nodes}
        total, _ = count_crossings(uv, tree)
        assert total == naive_crossing_count(uv, tree)
        layouts += 1
    ok("crossing counter equivalence", f"{layouts} random layouts")
