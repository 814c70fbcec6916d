"""Hierarchical 3D exploration path.

The camera visits every hierarchy view depth-first from the global view down:
a 90-degree dolly arc around each subtree center (parallax), then a quadratic
Bezier transition to the next view with the look direction slerped. Phases
meet exactly in position and are sampled on a global k/rate time grid, so
doubling the rate reproduces the coarser samples bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import normalize, perpendicular_up, slerp
from .viewpoint import CameraPose, ViewEntry, ViewHierarchy


@dataclass
class CameraKeyframe:
    time: float
    pose: CameraPose
    phase: str  # "transition" | "dolly"


@dataclass
class CameraPath:
    keyframes: list[CameraKeyframe]
    sample_rate: float


@dataclass
class PathConfig:
    sample_rate: float = 30.0
    dolly_duration: float = 3.0
    transition_speed: float | None = None  # units/s; default: level-0 radius per second


def bezier_point(p0: np.ndarray, p1: np.ndarray, p2: np.ndarray, t: float) -> np.ndarray:
    s = 1.0 - t
    return s * s * p0 + 2.0 * s * t * p1 + t * t * p2


def dolly_arc(entry: ViewEntry, t: float) -> CameraPose:
    """Pose at parameter t of the 90-degree orbit: the camera stays on the
    sphere of radius D around the subtree center, sweeping from the optimal
    pose toward its right vector, always looking at the center."""
    u0 = normalize(entry.pose.position - entry.center)
    forward = -u0
    right = normalize(np.cross(forward, entry.pose.up))
    ang = t * 0.5 * math.pi
    offset = math.cos(ang) * u0 + math.sin(ang) * right
    position = entry.center + entry.search_radius * offset
    up = perpendicular_up(entry.center - position)
    return CameraPose(position=position, look_at=entry.center.copy(), up=up)


def _dfs_order(views: ViewHierarchy) -> list[ViewEntry]:
    by_level: dict[int, list[ViewEntry]] = {}
    for e in views.entries:
        by_level.setdefault(e.level, []).append(e)
    if not by_level:
        return []
    order: list[ViewEntry] = []

    def visit(entry: ViewEntry):
        order.append(entry)
        for child in by_level.get(entry.level + 1, []):
            if child.node_ids <= entry.node_ids:
                visit(child)

    for root in by_level[min(by_level)]:
        visit(root)
    return order


class _DollyPhase:
    kind = "dolly"

    def __init__(self, entry: ViewEntry, duration: float):
        self.entry = entry
        self.duration = duration

    def pose(self, s: float) -> CameraPose:
        return dolly_arc(self.entry, s)


class _TransitionPhase:
    kind = "transition"

    def __init__(self, start: CameraPose, start_center: np.ndarray,
                 end_entry: ViewEntry, control: np.ndarray, duration: float):
        self.p0 = start.position
        self.p2 = end_entry.pose.position
        self.control = control
        self.d0 = normalize(start.look_at - start.position)
        self.d1 = end_entry.pose.look_dir()
        self.l0 = float(np.linalg.norm(start.look_at - start.position))
        self.l1 = float(np.linalg.norm(end_entry.pose.look_at - end_entry.pose.position))
        self.duration = duration

    def pose(self, s: float) -> CameraPose:
        position = bezier_point(self.p0, self.control, self.p2, s)
        direction = slerp(self.d0, self.d1, s)
        look_at = position + ((1.0 - s) * self.l0 + s * self.l1) * direction
        return CameraPose(position=position, look_at=look_at,
                          up=perpendicular_up(direction))


def _control_point(p0: np.ndarray, p2: np.ndarray, a: ViewEntry, b: ViewEntry) -> np.ndarray:
    """Chord midpoint pushed radially out from the joint bounding center until
    it clears the larger of the two view spheres."""
    center = 0.5 * (a.center + b.center)
    clearance = max(a.search_radius, b.search_radius)
    mid = 0.5 * (p0 + p2)
    away = mid - center
    dist = float(np.linalg.norm(away))
    if dist >= clearance:
        return mid
    if dist <= 1e-12:
        away = a.pose.up
        dist = 1.0
    return center + away * (clearance / dist)


def build_phases(views: ViewHierarchy, config: PathConfig | None = None) -> list:
    """Alternating dolly/transition phases in depth-first hierarchy order.
    Dolly durations are fixed; transition durations grow with chord length so
    the apparent travel speed stays constant."""
    config = config or PathConfig()
    order = _dfs_order(views)
    if not order:
        raise ValueError("view hierarchy is empty")
    speed = config.transition_speed
    if speed is None:
        speed = max(order[0].search_radius, 1e-9)
    phases: list = [_DollyPhase(order[0], config.dolly_duration)]
    for prev, nxt in zip(order, order[1:]):
        start = dolly_arc(prev, 1.0)
        p0 = start.position
        control = _control_point(p0, nxt.pose.position, prev, nxt)
        chord = float(np.linalg.norm(nxt.pose.position - p0))
        duration = max(chord / speed, 1.0 / config.sample_rate)
        phases.append(_TransitionPhase(start, prev.center, nxt, control, duration))
        phases.append(_DollyPhase(nxt, config.dolly_duration))
    return phases


def build_path(views: ViewHierarchy, config: PathConfig | None = None) -> CameraPath:
    """Depth-first exploration over the view hierarchy, sampled at the
    configured rate."""
    config = config or PathConfig()
    phases = build_phases(views, config)
    starts = np.concatenate([[0.0], np.cumsum([p.duration for p in phases])])
    total = float(starts[-1])
    keyframes: list[CameraKeyframe] = []
    n_samples = int(math.floor(total * config.sample_rate))
    grid = [k / config.sample_rate for k in range(n_samples + 1)]
    # phase boundaries are sampled exactly (they are rate-independent, so a
    # doubled rate still reproduces every coarser sample)
    times = sorted(set(grid) | {float(t) for t in starts})
    phase_idx = 0
    for t in times:
        while phase_idx + 1 < len(phases) and t >= starts[phase_idx + 1]:
            phase_idx += 1
        phase = phases[phase_idx]
        s = (t - starts[phase_idx]) / phase.duration
        s = min(max(s, 0.0), 1.0)
        keyframes.append(CameraKeyframe(time=t, pose=phase.pose(s), phase=phase.kind))
    return CameraPath(keyframes=keyframes, sample_rate=config.sample_rate)


def path_to_json(path: CameraPath) -> dict:
    return {"sampleRate": float(path.sample_rate), "keyframes": [
        {"time": float(k.time),
         "position": [float(v) for v in k.pose.position],
         "lookAt": [float(v) for v in k.pose.look_at],
         "up": [float(v) for v in k.pose.up],
         "phase": k.phase}
        for k in path.keyframes]}


def path_to_csv(path: CameraPath) -> str:
    lines = ["time,px,py,pz,lx,ly,lz,ux,uy,uz,phase"]
    for k in path.keyframes:
        vals = [k.time, *k.pose.position, *k.pose.look_at, *k.pose.up]
        lines.append(",".join(f"{v:.9g}" for v in vals) + f",{k.phase}")
    return "\n".join(lines) + "\n"
