"""Exception types shared across the package."""


class MplpError(Exception):
    """Base class for all package-specific errors."""


class FormatError(MplpError):
    """Malformed input data (matrices, models, problem files)."""


class RankDeficientError(MplpError):
    """A factorization required full column rank and did not find it."""


class IllConditionedError(MplpError):
    """A well-conditioning assumption on the problem data is violated."""


class IllPosedError(MplpError):
    """An auxiliary objective is linearly dependent on earlier data."""


class MisclassificationError(MplpError):
    """The rank structure at a probe contradicts the chosen solution case,
    usually a sign that the zero tolerance misjudged a support set."""


class UnboundedError(MplpError):
    """An LP that was expected to have a finite optimum is unbounded."""


class InfeasibleError(MplpError):
    """An LP that was expected to be feasible is infeasible."""


class ProjectionOverflowError(MplpError):
    """Fourier-Motzkin elimination exceeded the intermediate row budget."""


class EquivalentCostError(MplpError):
    """No uniqueness-inducing cost vector was found within the retry budget."""


class IterationLimitError(MplpError):
    """An iteration cap (solver pivots or partition work list) was exceeded."""
