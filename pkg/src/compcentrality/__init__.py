"""Eigenvector centrality computed one strongly connected component at a time."""

from .condensation import (BlockLayout, Decomposition, InvariantError, assign_levels,
                           build_layout, find_components, sort_components)
from .driver import (ComponentRecord, DegenerateGraphError, RunReport, baseline_centrality,
                     detect_blocks, merge_isolated_blocks, run_auto_blocks, run_componentwise)
from .graph import (GraphFormatError, GraphSlice, SparseGraph, from_edges, induced_subgraph,
                    parse_edge_list, read_edge_list, transpose, write_edge_list)
from .kernels import (IterationOutcome, SolveOptions, power_iteration, series_accumulate,
                      single_vertex_batch)

__version__ = "0.1.0"

__all__ = [
    "BlockLayout", "ComponentRecord", "Decomposition", "DegenerateGraphError",
    "GraphFormatError", "GraphSlice", "InvariantError", "IterationOutcome", "RunReport",
    "SolveOptions", "SparseGraph", "assign_levels", "baseline_centrality", "build_layout",
    "detect_blocks", "find_components", "from_edges", "induced_subgraph",
    "merge_isolated_blocks", "parse_edge_list", "power_iteration", "read_edge_list",
    "run_auto_blocks", "run_componentwise", "series_accumulate", "single_vertex_batch",
    "sort_components", "transpose", "write_edge_list",
]
