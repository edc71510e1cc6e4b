"""Helpers shared by the engine integration tests and the acceptance
suite: recovery-space evaluation and the adaptive path-continuity probe."""

import numpy as np


def original_map(lp, cr):
    """Region map pushed through the variable recovery: x_orig(theta)."""
    R = lp.recovery_R.toarray()
    E = R @ cr.E + lp.recovery_T.toarray()
    e = R @ cr.e + lp.recovery_r
    return E, e


def original_point(lp, x, theta):
    return (lp.recovery_R.toarray() @ x + lp.recovery_r
            + lp.recovery_T.toarray() @ np.asarray(theta, float))


def path_continuity(lp, res, p0, p1, component=None, samples=25):
    """Worst jump of the solution map across region changes along a
    segment.  Segments whose endpoints land in different regions are
    subdivided until truly adjacent, then the change is bisected to the
    shared facet and both maps evaluated at the crossing point."""
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)

    def at(t):
        return (1 - t) * p0 + t * p1

    def region(t):
        cr = res.find(at(t), tol=1e-7)
        assert cr is not None
        return cr

    ts = np.linspace(0.0, 1.0, samples)
    crs = [region(t) for t in ts]
    stack = list(zip(ts[:-1], ts[1:], crs[:-1], crs[1:]))
    worst = 0.0
    while stack:
        ta, tb, ca, cb = stack.pop()
        if ca.id == cb.id:
            continue
        if tb - ta > 1e-4:
            tm = 0.5 * (ta + tb)
            cm = region(tm)
            stack.append((ta, tm, ca, cm))
            stack.append((tm, tb, cm, cb))
            continue
        lo_t, hi_t = ta, tb
        for _ in range(60):
            mid = 0.5 * (lo_t + hi_t)
            if ca.region.contains(at(mid), tol=1e-9):
                lo_t = mid
            else:
                hi_t = mid
        cross = at(0.5 * (lo_t + hi_t))
        xa = original_point(lp, ca.primal(cross), cross)
        xb = original_point(lp, cb.primal(cross), cross)
        if component is None:
            worst = max(worst, float(np.abs(xa - xb).max()))
        else:
            worst = max(worst, abs(float(xa[component] - xb[component])))
    return worst
