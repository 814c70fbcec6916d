"""Glue shared by the CLI and the service: parse -> views -> targets -> solve."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import (EmbeddingSolution, EnergyWeights, PinnedSegment,
                        SolveConfig, solve)
from .evaluation import GeometryLossReport, report
from .projection import TargetAngles, compute_target_angles
from .skeleton import (EnhancedTree, Segment, SkeletonTree, SubtreeHierarchy,
                       build_enhanced_tree, build_hierarchy, parse_json,
                       parse_swc, segment_tree)
from .viewpoint import ViewHierarchy, ViewSearchConfig, build_view_hierarchy


@dataclass
class PipelineState:
    tree: SkeletonTree
    segments: list[Segment]
    etree: EnhancedTree
    hierarchy: SubtreeHierarchy
    views: ViewHierarchy
    targets: TargetAngles


def load_tree(path: Path, fmt: str | None = None) -> SkeletonTree:
    text = Path(path).read_text()
    if fmt is None:
        fmt = "json" if str(path).lower().endswith(".json") else "swc"
    return parse_text(text, fmt)


def parse_text(text: str, fmt: str) -> SkeletonTree:
    if fmt == "json":
        return parse_json(text)
    return parse_swc(text)


def prepare(tree: SkeletonTree, view_config: ViewSearchConfig | None = None) -> PipelineState:
    segments = segment_tree(tree)
    etree = build_enhanced_tree(tree)
    hierarchy = build_hierarchy(tree, segments)
    views = build_view_hierarchy(etree, hierarchy, view_config)
    targets = compute_target_angles(tree, segments, hierarchy, views)
    return PipelineState(tree=tree, segments=segments, etree=etree,
                         hierarchy=hierarchy, views=views, targets=targets)


def solve_embedding(state: PipelineState, weights: EnergyWeights | None = None,
                    config: SolveConfig | None = None,
                    pinned: dict[int, PinnedSegment] | None = None,
                    progress=None) -> EmbeddingSolution:
    return solve(state.tree, state.segments, state.targets, weights, config,
                 pinned, progress)


def loss_report(state: PipelineState, solution: EmbeddingSolution) -> GeometryLossReport:
    return report(state.tree, solution, state.targets, state.segments)


def solution_from_json(doc: dict) -> EmbeddingSolution:
    uv = {int(nid): np.array([float(p[0]), float(p[1])])
          for nid, p in doc["uv"].items()}
    return EmbeddingSolution(
        uv=uv, ratios=np.array(doc["ratios"], dtype=np.float64),
        energy=float(doc["energy"]), crossings=int(doc["crossings"]),
        iterations=int(doc["iterations"]), seed=int(doc["seed"]))
