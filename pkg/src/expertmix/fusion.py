"""Expert/data fusion estimators.

Both estimators return the point closest to the expert prior among all
distributions within ``epsilon`` of the empirical distribution, and both land
on the segment between the two:

* ``l1_barycenter`` -- L1 geometry, closed form.
* ``kl_centroid`` -- minimises ``KL(expert || p)`` subject to
  ``KL(emp || p) <= epsilon``; solved by bisection on the segment weight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import rel_entr

from .model import Distribution, ExpertMixError, kl_divergence, l1_distance

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200


class Method(str, enum.Enum):
    L1 = "l1"
    KL = "kl"


@dataclass(frozen=True, eq=False)
class FusionReport:
    """Estimate plus diagnostics.

    ``mix_weight`` is the weight on the expert prior (alpha for L1,
    ``1 / (1 + lambda_tilde)`` for KL). ``achieved_constraint`` is the
    distance from the estimate to the empirical distribution in the
    estimator's own geometry.
    """

    estimate: Distribution
    method: Method
    epsilon: float
    mix_weight: float
    lambda_tilde: Optional[float]
    achieved_constraint: float
    expert_feasible: bool
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "epsilon": self.epsilon,
            "mix_weight": self.mix_weight,
            "lambda_tilde": self.lambda_tilde,
            "achieved_constraint": self.achieved_constraint,
            "expert_feasible": self.expert_feasible,
            "iterations": self.iterations,
            **self.extra,
        }


def _same_space(expert: Distribution, emp: Distribution):
    if expert.K != emp.K:
        raise ExpertMixError(f"mismatched spaces: K={expert.K} vs K={emp.K}")


def _check_epsilon(epsilon):
    if not epsilon >= 0:
        raise ExpertMixError(f"epsilon must be non-negative, got {epsilon}")


def l1_mix_weight(expert: np.ndarray, emp: np.ndarray, epsilon: float) -> float:
    d = float(np.abs(emp - expert).sum())
    if d == 0.0 or epsilon >= d:
        return 1.0
    return epsilon / d


def l1_barycenter(expert: Distribution, emp: Distribution, epsilon: float) -> FusionReport:
    """Closest point to ``expert`` in L1 among those within ``epsilon`` of ``emp``.

    The L1 problem generally has a whole set of minimisers; this always
    returns the one on the expert/empirical segment.
    """
    _same_space(expert, emp)
    _check_epsilon(epsilon)
    e, m = expert.probs, emp.probs
    alpha = l1_mix_weight(e, m, epsilon)
    if alpha == 1.0:
        p = e.copy()
    else:
        p = alpha * e + (1.0 - alpha) * m
        p = np.clip(p, 0.0, None)
        p /= p.sum()
    est = Distribution(p, expert.space)
    d = l1_distance(e, m)
    return FusionReport(est, Method.L1, float(epsilon), alpha, None,
                        l1_distance(est, emp), d <= epsilon)


def _segment_kl(emp: np.ndarray, expert: np.ndarray, w: float) -> float:
    """KL(emp || w*expert + (1-w)*emp), restricted to emp's support."""
    s = emp > 0
    q = emp[s] + w * (expert[s] - emp[s])
    return float(rel_entr(emp[s], q).sum())


def kl_centroid_weight(expert: np.ndarray, emp: np.ndarray, epsilon: float,
                       bracket=(0.0, 1.0), tol: float = BISECTION_TOL,
                       max_iter: int = BISECTION_MAX_ITER):
    """Largest expert weight w with ``KL(emp || w*expert + (1-w)*emp) <= epsilon``.

    Returns ``(w, iterations)``. ``bracket`` must contain the answer; the
    default covers every case. The segment function is convex with value 0
    at w = 0, so it is non-decreasing and bisection is exact up to ``tol``.
    """
    D = float(rel_entr(emp, expert).sum())
    if D <= epsilon:
        return 1.0, 0
    if epsilon == 0.0:
        # g(w) > 0 for every w > 0 once D > 0
        return 0.0, 0
    lo, hi = bracket
    if lo > 0.0 and _segment_kl(emp, expert, lo) > epsilon:
        raise ExpertMixError("bracket lower end is infeasible")
    it = 0
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g = _segment_kl(emp, expert, mid)
        if g <= epsilon:
            lo = mid
            if epsilon - g <= tol:
                break
        else:
            hi = mid
    return lo, it


def kl_centroid(expert: Distribution, emp: Distribution, epsilon: float,
                bracket=(0.0, 1.0)) -> FusionReport:
    """KL centroid: argmin KL(expert || p) subject to KL(emp || p) <= epsilon.

    If the expert is already within ``epsilon`` of the data it is returned
    unchanged with ``lambda_tilde = 0``. ``lambda_tilde`` is ``+inf`` when
    the estimate collapses onto the empirical distribution.
    """
    _same_space(expert, emp)
    _check_epsilon(epsilon)
    e, m = expert.probs, emp.probs
    w, it = kl_centroid_weight(e, m, epsilon, bracket)
    if w == 1.0:
        p = e.copy()
    else:
        p = w * e + (1.0 - w) * m
        p /= p.sum()
    est = Distribution(p, expert.space)
    lam = 0.0 if w == 1.0 else (math.inf if w == 0.0 else (1.0 - w) / w)
    D = kl_divergence(emp, expert)
    return FusionReport(est, Method.KL, float(epsilon), w, lam,
                        kl_divergence(emp, est), D <= epsilon, it)


def fuse(expert: Distribution, emp: Distribution, epsilon: float, method="kl") -> FusionReport:
    method = Method(method)
    if method is Method.KL:
        return kl_centroid(expert, emp, epsilon)
    return l1_barycenter(expert, emp, epsilon)


@dataclass(frozen=True)
class Theorem1Diagnostic:
    error: float            # ||p* - estimate||_1
    bound: float            # 2 min(eps, ||p* - expert||_1)
    event_holds: bool       # ||p* - emp||_1 <= eps

    @property
    def bound_holds(self) -> bool:
        return self.error <= self.bound + 1e-9


@dataclass(frozen=True)
class Theorem2Diagnostic:
    error: float                  # KL(estimate || p*)
    expert_error: float           # KL(expert || p*)
    rate_bound: float             # eps * (L_n + 1)
    bound: float                  # min of the two
    L_n: Optional[float]
    event_holds: bool             # KL(emp || p*) <= eps
    trivial: bool = False         # expert == emp, L_n undefined

    def _ok(self, rhs):
        return self.error <= rhs + 1e-9 * max(1.0, abs(rhs))

    @property
    def bound_holds(self) -> bool:
        return self._ok(self.bound)

    @property
    def expert_branch_holds(self) -> bool:
        return self._ok(self.expert_error)

    @property
    def rate_branch_holds(self) -> bool:
        return self._ok(self.rate_bound)


def theorem1_check(p_star, expert, emp, epsilon, estimate) -> Theorem1Diagnostic:
    err = l1_distance(p_star, estimate)
    bound = 2.0 * min(epsilon, l1_distance(p_star, expert))
    return Theorem1Diagnostic(err, bound, l1_distance(p_star, emp) <= epsilon)


def theorem2_check(p_star, expert, emp, epsilon, estimate) -> Theorem2Diagnostic:
    err = kl_divergence(estimate, p_star)
    A = kl_divergence(expert, p_star)
    B = kl_divergence(emp, p_star)
    D = kl_divergence(emp, expert)
    event = B <= epsilon
    if D == 0.0:
        return Theorem2Diagnostic(err, A, math.nan, A, None, event, trivial=True)
    L = (A - B) / D if math.isfinite(D) else 0.0
    rate = epsilon * (L + 1.0)
    return Theorem2Diagnostic(err, A, rate, min(A, rate), L, event)
