"""Planar embedding, entropy-based camera views, and 3D exploration paths
for treelike skeletons."""

from .crossing import count_crossings, crossing_points
from .embedding import (EmbeddingSolution, EnergyWeights, PinnedSegment,
                        SolveConfig, adjust_angle, apply_edit, embedding_energy,
                        radial_seed, realize_layout, solve, solution_to_json)
from .evaluation import GeometryLossReport, metric1, metric2, report
from .navigation import (CameraKeyframe, CameraPath, PathConfig, bezier_point,
                         build_path, dolly_arc)
from .projection import (PrincipalPlane, TargetAngles, compute_target_angles,
                         principal_plane, project_point)
from .skeleton import (EnhancedTree, Segment, SkeletonNode, SkeletonParseError,
                       SkeletonTree, Subtree, SubtreeHierarchy,
                       build_enhanced_tree, build_hierarchy, parse_json,
                       parse_swc, segment_tree, serialize_swc)
from .viewpoint import (CameraPose, DegenerateViewError, ViewHierarchy,
                        ViewSearchConfig, build_view_hierarchy, find_best_view,
                        view_information)

__version__ = "0.1.0"
