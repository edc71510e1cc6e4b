"""Multi-parametric linear programming: critical-region partitions of a
parameter box with explicit affine primal and dual solution maps."""

from .errors import (
    MplpError,
    FormatError,
    RankDeficientError,
    IllConditionedError,
    IllPosedError,
    MisclassificationError,
    UnboundedError,
    InfeasibleError,
    ProjectionOverflowError,
    EquivalentCostError,
    IterationLimitError,
)
from .lp import (
    Bound,
    GeneralLP,
    OriginalConstraint,
    StandardFormLP,
    VertexSolution,
    free_bounds,
    to_standard_form,
    solve_lp,
    lexicographic_solve,
    multiplicity_check,
    degeneracy_degree,
    kkt_residuals,
)
from .geometry import (
    HPolyhedron,
    OptimalFace,
    build_optimal_face,
    chebyshev_center_region,
    project_polyhedron,
    remove_redundant,
)
from .engine import (
    CASE_UNIQUE_ND,
    CASE_UNIQUE_D,
    CASE_MULTIPLE_ND,
    CASE_MULTIPLE_D,
    CriticalRegion,
    IndexPartition,
    Partition,
    RunConfig,
    bounding_box,
    classify,
    equivalent_cost_vector,
    partition,
    problem_fingerprint,
    resolve_multiplicity_lex,
    resolve_multiplicity_qp,
)
from .fba import (
    KineticParams,
    MetabolicModel,
    ParameterLegend,
    Reaction,
    load_model,
    metabolic_modes,
    michaelis_menten_lb,
    never_active_reactions,
    recovered_flux,
    to_parametric_lp,
)

__version__ = "0.1.0"

__all__ = [
    "MplpError",
    "FormatError",
    "RankDeficientError",
    "IllConditionedError",
    "IllPosedError",
    "MisclassificationError",
    "UnboundedError",
    "InfeasibleError",
    "ProjectionOverflowError",
    "EquivalentCostError",
    "IterationLimitError",
    "Bound",
    "GeneralLP",
    "OriginalConstraint",
    "StandardFormLP",
    "VertexSolution",
    "free_bounds",
    "to_standard_form",
    "solve_lp",
    "lexicographic_solve",
    "multiplicity_check",
    "degeneracy_degree",
    "kkt_residuals",
    "HPolyhedron",
    "OptimalFace",
    "build_optimal_face",
    "chebyshev_center_region",
    "project_polyhedron",
    "remove_redundant",
    "CASE_UNIQUE_ND",
    "CASE_UNIQUE_D",
    "CASE_MULTIPLE_ND",
    "CASE_MULTIPLE_D",
    "CriticalRegion",
    "IndexPartition",
    "Partition",
    "RunConfig",
    "bounding_box",
    "classify",
    "equivalent_cost_vector",
    "partition",
    "problem_fingerprint",
    "resolve_multiplicity_lex",
    "resolve_multiplicity_qp",
    "KineticParams",
    "MetabolicModel",
    "ParameterLegend",
    "Reaction",
    "load_model",
    "metabolic_modes",
    "michaelis_menten_lb",
    "never_active_reactions",
    "recovered_flux",
    "to_parametric_lp",
    "__version__",
]
