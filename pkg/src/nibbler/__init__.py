"""Correspondence coloring of locally sparse graphs by the semi-random
(nibble) method: exact pattern counting and sparsity certification,
cover construction and validation, one-round wasteful coloring, the
iterated parameter schedule, and an algorithmic local-lemma finisher.
"""

from .errors import BudgetExhaustedError, NibblerError, PreconditionError
from .graph import Graph, induced_subgraph, load_graph, parse_graph, save_graph
from .patterns import (
    PatternGraph,
    SparsityReport,
    alon_sparse_edge_bound,
    automorphism_count,
    certify_local_sparsity,
    count_copies,
    count_copies_in_neighborhood,
    ex_brute,
    kst_edge_bound,
    local_edge_bound,
)
from .cover import (
    CorrespondenceCover,
    PartialColoring,
    available_list,
    chromatic_number_exact,
    is_proper,
    list_cover,
    load_cover,
    load_coloring,
    multipartite_envelope,
    random_cover,
    s2_lift_condition,
    save_cover,
    save_coloring,
    validate_cover,
)
from .nibble import (
    NibbleOutcome,
    NibbleParams,
    avg_color_degree,
    check_hypotheses,
    derived_params,
    iteration_accept,
    wasteful_step,
)
from .finisher import ResampleTrace, final_blow, lll_margin
from .schedule import (
    PipelineResult,
    Schedule,
    build_schedule,
    check_schedule_sanity,
    run_pipeline,
    select_c,
)
from .instances import (
    gnp,
    measured_local_sparsity,
    pattern_free_graph,
    planted_sparse,
    random_bipartite,
    two_fold_c6_example,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhaustedError",
    "CorrespondenceCover",
    "Graph",
    "NibbleOutcome",
    "NibbleParams",
    "NibblerError",
    "PartialColoring",
    "PatternGraph",
    "PipelineResult",
    "PreconditionError",
    "ResampleTrace",
    "Schedule",
    "SparsityReport",
    "alon_sparse_edge_bound",
    "automorphism_count",
    "available_list",
    "avg_color_degree",
    "build_schedule",
    "certify_local_sparsity",
    "check_hypotheses",
    "check_schedule_sanity",
    "chromatic_number_exact",
    "count_copies",
    "count_copies_in_neighborhood",
    "derived_params",
    "ex_brute",
    "final_blow",
    "gnp",
    "induced_subgraph",
    "is_proper",
    "iteration_accept",
    "kst_edge_bound",
    "list_cover",
    "lll_margin",
    "load_coloring",
    "load_cover",
    "load_graph",
    "local_edge_bound",
    "measured_local_sparsity",
    "multipartite_envelope",
    "parse_graph",
    "pattern_free_graph",
    "planted_sparse",
    "random_bipartite",
    "random_cover",
    "run_pipeline",
    "s2_lift_condition",
    "save_coloring",
    "save_cover",
    "save_graph",
    "select_c",
    "two_fold_c6_example",
    "validate_cover",
    "wasteful_step",
]
