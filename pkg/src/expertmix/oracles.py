"""Reference solvers used to cross-check the production estimators.

These solve the defining optimisation problems directly with a generic
conic solver (cvxpy / Clarabel), without using the segment structure the
production code relies on. They are slow and meant for small K.
"""

from __future__ import annotations

import warnings

import numpy as np

from .model import ConstraintSet, Distribution, ExpertMixError, OutcomeSpace

ORACLE_MAX_K = 16


def _cvxpy():
    import cvxpy as cp
    return cp


def _solve(problem):
    with warnings.catch_warnings():
        # "optimal_inaccurate" at these tolerances is still far below test tolerances
        warnings.simplefilter("ignore", UserWarning)
        problem.solve(solver="CLARABEL", tol_gap_abs=1e-12, tol_gap_rel=1e-12,
                      tol_feas=1e-12, max_iter=1000, static_regularization_constant=1e-12)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise ExpertMixError(f"oracle solver failed: {problem.status}")


def _finish(x, like: Distribution) -> Distribution:
    p = np.clip(np.asarray(x, dtype=float).ravel(), 0.0, None)
    return Distribution(p / p.sum(), like.space)


def lp_projection_oracle(expert: Distribution, emp: Distribution, epsilon: float,
                         i: int = 1, j: int = 1) -> Distribution:
    """argmin ||p - expert||_i over the simplex subject to ||p - emp||_j <= epsilon."""
    if i not in (1, 2) or j not in (1, 2):
        raise ExpertMixError(f"unsupported norm indices ({i}, {j})")
    if expert.K > ORACLE_MAX_K:
        raise ExpertMixError(f"oracle limited to K <= {ORACLE_MAX_K}")
    cp = _cvxpy()
    p = cp.Variable(expert.K, nonneg=True)
    prob = cp.Problem(cp.Minimize(cp.norm(p - expert.probs, i)),
                      [cp.sum(p) == 1, cp.norm(p - emp.probs, j) <= epsilon])
    _solve(prob)
    return _finish(p.value, expert)


def kl_projection_oracle(expert: Distribution, emp: Distribution, epsilon: float) -> Distribution:
    """argmin KL(expert || p) over the simplex subject to KL(emp || p) <= epsilon."""
    if expert.K > ORACLE_MAX_K:
        raise ExpertMixError(f"oracle limited to K <= {ORACLE_MAX_K}")
    cp = _cvxpy()
    e, m = expert.probs, emp.probs
    se, sm = e > 0, m > 0
    p = cp.Variable(expert.K, nonneg=True)
    # KL(a || p) = sum a log a - sum a log p over a's support
    neg_ent_m = float(np.sum(m[sm] * np.log(m[sm])))
    prob = cp.Problem(
        cp.Minimize(-e[se] @ cp.log(p[np.flatnonzero(se)])),
        [cp.sum(p) == 1,
         -m[sm] @ cp.log(p[np.flatnonzero(sm)]) <= epsilon - neg_ent_m])
    _solve(prob)
    return _finish(p.value, expert)


def maxent_oracle(constraints: ConstraintSet, space: OutcomeSpace) -> Distribution:
    """Entropy maximiser over the constraint set, by direct conic solve."""
    if space.cell_count > ORACLE_MAX_K:
        raise ExpertMixError(f"oracle limited to K <= {ORACLE_MAX_K}")
    cp = _cvxpy()
    allowed = constraints.allowed_mask(space)
    if not allowed.any():
        raise ExpertMixError("every cell is forbidden")
    bits = space.bits[allowed].astype(float)
    p = cp.Variable(int(allowed.sum()), nonneg=True)
    cons = [cp.sum(p) == 1]
    for b in constraints.marginal_bounds:
        m = bits[:, b.index] @ p
        cons += [m == b.lo] if b.is_equality else [m >= b.lo, m <= b.hi]
    prob = cp.Problem(cp.Maximize(cp.sum(cp.entr(p))), cons)
    _solve(prob)
    x = np.zeros(space.cell_count)
    x[allowed] = np.clip(p.value, 0.0, None)
    return Distribution(x / x.sum(), space)


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


def dykstra_project(x: np.ndarray, constraints: ConstraintSet, space: OutcomeSpace,
                    tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Euclidean projection of ``x`` onto simplex ∩ support ∩ marginal slabs.

    Dykstra's alternating projections over the face of the simplex given by
    the allowed cells and one slab ``lo <= a.p <= hi`` per marginal bound.
    """
    allowed = constraints.allowed_mask(space)
    rows = [(space.bits[:, b.index].astype(float), b.lo, b.hi) for b in constraints.marginal_bounds]

    def face(v):
        out = np.zeros_like(v)
        out[allowed] = project_simplex(v[allowed])
        return out

    def slab(a, lo, hi):
        nrm = a @ a

        def proj(v):
            s = a @ v
            if s < lo:
                return v + (lo - s) / nrm * a
            if s > hi:
                return v - (s - hi) / nrm * a
            return v
        return proj

    projs = [face] + [slab(*r) for r in rows]
    incs = [np.zeros_like(x, dtype=float) for _ in projs]
    y = np.asarray(x, dtype=float).copy()
    for _ in range(max_iter):
        prev = y
        for k, P in enumerate(projs):
            z = P(y + incs[k])
            incs[k] = y + incs[k] - z
            y = z
        if np.abs(y - prev).max() <= tol:
            break
    return y
