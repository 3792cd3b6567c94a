"""Maximum-entropy expert prior under marginal / support constraints."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .model import (
    ConstraintSet,
    Distribution,
    ExpertMixError,
    InfeasibleConstraintsError,
    OutcomeSpace,
    entropy,
)

RESIDUAL_TOL = 1e-8
ENTROPY_TOL = 1e-12
MAX_CYCLES = 10_000
_MASS_FLOOR = 1e-300


@dataclass(frozen=True)
class MaxentSolution:
    distribution: Distribution
    entropy: float
    iterations: int
    converged: bool
    max_constraint_residual: float

    def to_report(self) -> dict:
        return {
            "entropy": self.entropy,
            "iterations": self.iterations,
            "converged": self.converged,
            "max_constraint_residual": self.max_constraint_residual,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    witness: Optional[Distribution] = None
    message: str = ""


def independent_product(marginals: Sequence[float], space: OutcomeSpace) -> Distribution:
    m = np.asarray(marginals, dtype=float)
    if m.shape != (space.symptom_count,):
        raise ExpertMixError(f"expected {space.symptom_count} marginals, got {m.shape}")
    if np.any(m < 0) or np.any(m > 1) or not np.all(np.isfinite(m)):
        raise ExpertMixError("marginals must lie in [0, 1]")
    probs = np.where(space.bits, m, 1.0 - m).prod(axis=1)
    return Distribution(probs, space)


def constraint_residuals(p: np.ndarray, constraints: ConstraintSet, space: OutcomeSpace) -> dict:
    """Per-constraint violation; zero means satisfied."""
    out = {"simplex": abs(float(p.sum()) - 1.0)}
    allowed = constraints.allowed_mask(space)
    out["support"] = float(p[~allowed].sum())
    m = p @ space.bits
    for b in constraints.marginal_bounds:
        out[f"marginal[{b.index}]"] = max(b.lo - m[b.index], m[b.index] - b.hi, 0.0)
    return out


def check_feasibility(constraints: ConstraintSet, space: OutcomeSpace) -> FeasibilityReport:
    """Phase-1 linear program: is the constraint set non-empty on the simplex?"""
    allowed = constraints.allowed_mask(space)
    K = space.cell_count
    if not allowed.any():
        return FeasibilityReport(False, None, "every cell is forbidden")
    A_ub, b_ub = [], []
    for b in constraints.marginal_bounds:
        row = space.bits[:, b.index].astype(float)
        A_ub += [row, -row]
        b_ub += [b.hi, -b.lo]
    res = linprog(
        np.zeros(K),
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.ones((1, K)),
        b_eq=[1.0],
        bounds=[(0.0, 1.0 if a else 0.0) for a in allowed],
        method="highs",
    )
    if res.status != 0:
        return FeasibilityReport(False, None, res.message)
    x = np.clip(res.x, 0.0, None)
    x[~allowed] = 0.0
    return FeasibilityReport(True, Distribution(x / x.sum(), space), "")


def solve_maxent(
    constraints: ConstraintSet,
    space: OutcomeSpace,
    tol: float = RESIDUAL_TOL,
    entropy_tol: float = ENTROPY_TOL,
    max_cycles: int = MAX_CYCLES,
) -> MaxentSolution:
    """Maximum-entropy distribution over the simplex intersected with ``constraints``.

    Starts from the uniform distribution on the allowed support and cycles
    through the marginal constraints, each step being an exact KL projection
    in the constraint's own dual coordinate. A marginal whose current value
    (with its own multiplier removed) already sits inside ``[lo, hi]`` gets a
    zero multiplier; otherwise it is scaled to the nearest endpoint. With
    equality bounds this is classical proportional fitting.

    Raises
    ------
    InfeasibleConstraintsError
        If the phase-1 check finds no feasible point, or the residual is
        still above ``tol`` after ``max_cycles`` cycles.
    """
    report = check_feasibility(constraints, space)
    if not report.feasible:
        raise InfeasibleConstraintsError(
            "infeasible constraints", {"phase1": report.message or "no feasible point"})

    bits = space.bits
    allowed = constraints.allowed_mask(space)
    active = []
    for b in constraints.marginal_bounds:
        col = bits[:, b.index]
        # degenerate endpoints pin a half of the cells to zero
        if b.hi == 0.0:
            allowed &= ~col
        elif b.lo == 1.0:
            allowed &= col
        elif not (b.lo == 0.0 and b.hi == 1.0):
            active.append(b)

    p = np.where(allowed, 1.0, 0.0)
    p[allowed] = np.maximum(1.0 / allowed.sum(), _MASS_FLOOR)
    p /= p.sum()
    log_mult = np.zeros(len(active))

    H = entropy(p)
    residual = _max_residual(p, active, bits)
    cycles = 0
    converged = not active
    while not converged and cycles < max_cycles:
        cycles += 1
        for k, b in enumerate(active):
            col = bits[:, b.index]
            # undo this constraint's previous multiplier
            if log_mult[k] != 0.0:
                p = np.where(col, p * math.exp(-log_mult[k]), p)
                p /= p.sum()
            m0 = float(p[col].sum())
            if m0 < b.lo:
                target = b.lo
            elif m0 > b.hi:
                target = b.hi
            else:
                log_mult[k] = 0.0
                continue
            if m0 <= 0.0 or m0 >= 1.0:
                raise InfeasibleConstraintsError(
                    "infeasible constraints",
                    {f"marginal[{b.index}]": abs(target - m0)})
            up, down = target / m0, (1.0 - target) / (1.0 - m0)
            p = np.where(col, p * up, p * down)
            log_mult[k] = math.log(up / down)
        p /= p.sum()
        H_new = entropy(p)
        residual = _max_residual(p, active, bits)
        converged = residual <= tol and abs(H_new - H) <= entropy_tol
        H = H_new

    if residual > tol:
        raise InfeasibleConstraintsError(
            "infeasible constraints",
            {k: v for k, v in constraint_residuals(p, constraints, space).items() if v > tol})

    p[~allowed] = 0.0
    dist = Distribution(p / p.sum(), space)
    return MaxentSolution(dist, entropy(dist), cycles, converged, residual)


def _max_residual(p, bounds, bits) -> float:
    if not bounds:
        return 0.0
    m = p @ bits
    return max(max(b.lo - m[b.index], m[b.index] - b.hi, 0.0) for b in bounds)
