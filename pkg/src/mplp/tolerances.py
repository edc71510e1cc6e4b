"""Numerical tolerances used throughout the package.

All comparisons in the library go through these values so that the
behaviour can be reasoned about (and tuned) in one place.  Absolute
tolerances are used where the quantity is already normalized; the
`tau_*` helpers produce the scale-aware values.
"""

import numpy as np

# Entries with magnitude below this are dropped when building sparse matrices.
ZERO_DROP = 1e-12

# Primal feasibility, dual feasibility and complementarity checks.
TAU_FEAS = 1e-8
TAU_DUAL = 1e-8
TAU_COMP = 1e-8

# Objective-value agreement between a solution map and a fresh solve.
TAU_OBJ = 1e-7

# Relative rank threshold: singular values (or pivots) below
# TAU_RANK_REL * (largest singular value / pivot) count as zero.
TAU_RANK_REL = 1e-9

# Relative Chebyshev-radius threshold for discarding thin regions,
# scaled by the diameter of the parameter box.
TAU_RADIUS_REL = 1e-7

# Pseudoinverse identity check (relative Frobenius norm).
TAU_PINV = 1e-8

# Relative support-classification threshold; overridable at run level
# (the command-line front end maps --tol-zero here).
ZERO_REL = 1e-9


def tau_zero(b):
    """Support-classification threshold, scaled by the right-hand side."""
    b = np.asarray(b, dtype=float)
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    return ZERO_REL * max(1.0, scale)


def tau_radius(diameter):
    """Thin-region threshold for a parameter box of the given diameter."""
    return TAU_RADIUS_REL * float(diameter)
