"""Translational penetration depth between rigid triangle soups.

Given an interpenetrating placement, the library returns a locally optimal
separating translation by walking the contact space: continuous collision
detection projects free placements onto it, and a projected Gauss-Seidel
solve of the local contact cone pulls the sample toward the query origin.
Per-region local depths come for free from the global answer.
"""

from .bvh import Body, Bvh, BvhNode, build, node_directional_distance, node_distance
from .ccd import CcdResult, SourcePenetratingError, mdd, out_project, triangle_mdd
from .lcs import LocalContactSpace, build_lcs
from .mesh import MeshError, Pose, TriangleMesh, apply_pose, load_obj, save_obj
from .oracle import OracleResult, convex_pd, relative_error, sampled_pd
from .pgs import PgsSolution, solve, solve_lcp
from .pipeline import PdQuery, PdResult, compute_pd, local_pds
from .proximity import (
    CollisionStatus,
    ContactFeature,
    Counters,
    NotInContactError,
    classify,
    contact_features,
    default_epsilon,
    min_distance,
)
from .seeding import (
    ClearanceField,
    CoherenceCache,
    SeedingError,
    auto_seed,
    build_clearance_field,
    centroid_difference,
    load_clearance_field,
    refine_by_line_search,
    save_clearance_field,
    seed_from_clearance,
    seed_from_coherence,
    seed_random,
)

__version__ = "0.1.0"

__all__ = [
    "Body", "Bvh", "BvhNode", "build", "node_distance", "node_directional_distance",
    "CcdResult", "SourcePenetratingError", "mdd", "out_project", "triangle_mdd",
    "LocalContactSpace", "build_lcs",
    "MeshError", "Pose", "TriangleMesh", "apply_pose", "load_obj", "save_obj",
    "OracleResult", "convex_pd", "relative_error", "sampled_pd",
    "PgsSolution", "solve", "solve_lcp",
    "PdQuery", "PdResult", "compute_pd", "local_pds",
    "CollisionStatus", "ContactFeature", "Counters", "NotInContactError",
    "classify", "contact_features", "default_epsilon", "min_distance",
    "ClearanceField", "CoherenceCache", "SeedingError", "auto_seed",
    "build_clearance_field", "centroid_difference", "load_clearance_field",
    "refine_by_line_search", "save_clearance_field", "seed_from_clearance",
    "seed_from_coherence", "seed_random",
    "__version__",
]
