"""Mirror-descent optimization over the unit simplex.

Centralized and synchronous-distributed subgradient solvers with pluggable
Bregman geometries (Euclidean and negative entropy), proof-derived runtime
monitors, Metropolis-Hastings mixing matrices, and a config-driven
experiment harness for robust L1 regression.
"""

from .central import RunTrace, check_step_inequality, run_md
from .distributed import (
    AgentState,
    DistTrace,
    MixingAssumptionError,
    check_contraction,
    check_step_bound,
    consensus_error,
    max_pairwise_distance,
    run_dmd,
)
from .geometry import (
    EUCLIDEAN,
    NEGATIVE_ENTROPY,
    GeometryDomainError,
    MirrorMap,
    bregman,
    euclidean,
    interior_clamp,
    is_feasible,
    mirror_step,
    mirror_step_rows,
    negative_entropy,
    project_simplex,
    project_simplex_rows,
    psi_grad,
    psi_value,
    sample_simplex,
)
from .network import (
    AssumptionReport,
    Graph,
    MixingMatrix,
    generate_graph,
    is_connected,
    load_graph,
    load_matrix,
    metropolis_weights,
    save_graph,
    save_matrix,
    second_singular_value,
    verify_assumptions,
)
from .problems import (
    ProblemInstance,
    ReferenceOptimum,
    block_lipschitz,
    block_subgradient,
    generate_instance,
    load_instance,
    objective,
    reference_optimum,
    residuals,
    row_subgradient,
    save_instance,
    simplex_grid,
    subgradient,
)
from .schedules import StepSchedule

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "AssumptionReport",
    "DistTrace",
    "EUCLIDEAN",
    "GeometryDomainError",
    "Graph",
    "MirrorMap",
    "MixingAssumptionError",
    "MixingMatrix",
    "NEGATIVE_ENTROPY",
    "ProblemInstance",
    "ReferenceOptimum",
    "RunTrace",
    "StepSchedule",
    "block_lipschitz",
    "block_subgradient",
    "bregman",
    "check_contraction",
    "check_step_bound",
    "check_step_inequality",
    "consensus_error",
    "euclidean",
    "generate_graph",
    "generate_instance",
    "interior_clamp",
    "is_connected",
    "is_feasible",
    "load_graph",
    "load_instance",
    "load_matrix",
    "max_pairwise_distance",
    "metropolis_weights",
    "mirror_step",
    "mirror_step_rows",
    "negative_entropy",
    "objective",
    "project_simplex",
    "project_simplex_rows",
    "psi_grad",
    "psi_value",
    "reference_optimum",
    "residuals",
    "row_subgradient",
    "run_dmd",
    "run_md",
    "sample_simplex",
    "save_graph",
    "save_instance",
    "save_matrix",
    "second_singular_value",
    "simplex_grid",
    "subgradient",
    "verify_assumptions",
]
