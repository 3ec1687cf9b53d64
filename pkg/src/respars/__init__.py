"""Spectral sparsification of weighted graphs by effective-resistance sampling."""

from .errors import (
    DenseLimitError,
    DisconnectedGraphError,
    GraphFormatError,
    NotALaplacianError,
    PreconditionError,
    ResparsError,
    SolverError,
)
from .graph import (
    WeightedGraph,
    dumps_graph,
    incidence,
    is_connected,
    laplacian,
    load_graph,
    loads_graph,
    save_graph,
)
from .linalg import SolveResult, pinv_apply_exact, solve_laplacian, spmv
from .resistance import (
    ResistanceOracle,
    all_edge_resistances,
    build_oracle,
    default_delta,
    exact_resistances,
    jl_dimension,
    query,
)
from .sparsify import (
    SampleConfig,
    SparsifierResult,
    default_q,
    mixed_probabilities,
    resistance_probabilities,
    sample_sparsifier,
    sparsify,
)
from .verify import (
    VerificationReport,
    cut_check,
    degree_bound_check,
    pi_matrix_checks,
    spectral_bounds,
    verify,
)

__version__ = "0.1.0"
