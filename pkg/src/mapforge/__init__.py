"""Combinatorial maps with the probabilistic toolbox that lives on
them: curvature, spanning forests, walks, percolation, local limits.
"""

__version__ = "0.1.0"

from .errors import (BadParameters, ConfigError, Disconnected,
                     DuplicateLabels, DuplicateWeights, EmptyBoundary,
                     EmptyTargets, GenusChangedWarning, IdentityFailure,
                     MapError, NoMarkedFaces, NotInvolution, NotNestable,
                     NotPermutation, NotPlanar, NotSpanningTree,
                     SourceInSink, TooLarge, WouldDisconnect)
from .map_core import (Map, RootedMap, ball, ball_with_vertices, build_map,
                       canonical_code, dual, map_from_json, map_to_json,
                       maps_equal, rooted_isomorphic, submap_delete_edges)

__all__ = [
    "Map", "RootedMap", "build_map", "dual", "ball", "ball_with_vertices",
    "canonical_code", "rooted_isomorphic", "maps_equal",
    "submap_delete_edges", "map_to_json", "map_from_json",
    "MapError", "NotPermutation", "NotInvolution", "Disconnected",
    "WouldDisconnect", "DuplicateLabels", "DuplicateWeights",
    "EmptyTargets", "NotPlanar", "NoMarkedFaces", "NotSpanningTree",
    "EmptyBoundary", "SourceInSink", "TooLarge", "BadParameters",
    "NotNestable", "ConfigError", "IdentityFailure", "GenusChangedWarning",
    "__version__",
]
