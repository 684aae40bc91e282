"""Discrete vector fields on triangulated 2D domains.

Builds a discrete (combinatorial) vector field from per-vertex vectors by
processing each vertex's outward star, extracts its topological skeleton
and simplifies it by weight-ranked V-path reversal.
"""

from .mesh import SimplexRef, TriMesh2, build_from_arrays, grid_triangulation
from .field import VectorField, gen_changes, gen_cosine, gen_random_smoothed
from .assignment import DiscretePairing, process_outward_stars
from .skeleton import VPath, Skeleton, extract_skeleton, trace_ascending, trace_descending
from .simplify import simplify_to
from .plcp import pl_critical_points
from .validation import validate_pairing

__all__ = [
    "SimplexRef", "TriMesh2", "build_from_arrays", "grid_triangulation",
    "VectorField", "gen_changes", "gen_cosine", "gen_random_smoothed",
    "DiscretePairing", "process_outward_stars",
    "VPath", "Skeleton", "extract_skeleton", "trace_ascending", "trace_descending",
    "simplify_to", "pl_critical_points", "validate_pairing",
]

__version__ = "0.1.0"
