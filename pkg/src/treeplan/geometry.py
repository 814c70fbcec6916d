"""Small shared vector helpers."""

from __future__ import annotations

import numpy as np

EPS = 1e-12


def normalize(v: np.ndarray, eps: float = EPS) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n <= eps:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def perpendicular_up(look_dir: np.ndarray) -> np.ndarray:
    """World +Z projected onto the plane perpendicular to `look_dir`;
    falls back to +X when the look direction is within 1e-6 of +-Z."""
    look = normalize(look_dir)
    if abs(look[2]) > 1.0 - 1e-6:
        ref = np.array([1.0, 0.0, 0.0])
    else:
        ref = np.array([0.0, 0.0, 1.0])
    up = ref - np.dot(ref, look) * look
    return normalize(up)


def slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation between unit vectors; falls back to a stable
    orthogonal detour for near-antiparallel inputs."""
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    if dot > 1.0 - 1e-12:
        return normalize((1.0 - t) * a + t * b)
    if dot < -1.0 + 1e-9:
        # pick a deterministic axis orthogonal to `a` and go the long way
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = normalize(np.cross(a, helper))
        theta = np.pi * t
        return np.cos(theta) * a + np.sin(theta) * axis
    theta = np.arccos(dot)
    return (np.sin((1.0 - t) * theta) * a + np.sin(t * theta) * b) / np.sin(theta)
