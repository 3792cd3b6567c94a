"""Core value types: outcome encoding, distributions, counts and expert constraints.

Cells are indexed ``0 .. K-1`` with ``K = 2**J``. Symptom ``j`` (0-based) is
present in cell ``i`` iff bit ``j`` of ``i`` is set, so cell 0 is the
all-absent combination and cell ``K-1`` has every symptom present.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import rel_entr

SIMPLEX_ATOL = 1e-9


class ExpertMixError(ValueError):
    """Domain error. ``source`` names the offending file or field when known."""

    def __init__(self, message: str, source: Optional[str] = None):
        super().__init__(message)
        self.source = source


class InfeasibleConstraintsError(ExpertMixError):
    def __init__(self, message: str = "infeasible constraints", residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


@dataclass(frozen=True)
class OutcomeSpace:
    symptom_count: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if int(self.symptom_count) != self.symptom_count or self.symptom_count < 1:
            raise ExpertMixError(f"symptom_count must be an integer >= 1, got {self.symptom_count}")
        if self.symptom_count > 20:
            raise ExpertMixError("at most 20 symptoms (K <= 2**20) are supported")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
            if len(self.labels) != self.symptom_count:
                raise ExpertMixError(
                    f"{len(self.labels)} labels given for {self.symptom_count} symptoms")

    @property
    def cell_count(self) -> int:
        return 1 << self.symptom_count

    @cached_property
    def bits(self) -> np.ndarray:
        """Boolean matrix of shape (K, J); ``bits[i, j]`` is symptom j in cell i."""
        cells = np.arange(self.cell_count)[:, None]
        out = ((cells >> np.arange(self.symptom_count)[None, :]) & 1).astype(bool)
        out.flags.writeable = False
        return out

    @cached_property
    def present_counts(self) -> np.ndarray:
        out = self.bits.sum(axis=1)
        out.flags.writeable = False
        return out

    def bitmask(self, cell: int) -> str:
        """Binary string of length J, symptom J-1 leftmost."""
        return format(cell, f"0{self.symptom_count}b")

    @classmethod
    def from_cell_count(cls, K: int) -> "OutcomeSpace":
        J = int(K).bit_length() - 1
        if K < 2 or (1 << J) != K:
            raise ExpertMixError(f"cell count {K} is not a power of two >= 2")
        return cls(J)


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray
    space: OutcomeSpace

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.shape[0] != self.space.cell_count:
            raise ExpertMixError(
                f"expected {self.space.cell_count} probabilities, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ExpertMixError("probabilities must be finite and non-negative")
        total = p.sum()
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ExpertMixError(f"probabilities sum to {total!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def K(self) -> int:
        return self.space.cell_count

    def __len__(self):
        return self.K

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __repr__(self):
        return f"Distribution(K={self.K}, probs={np.array2string(self.probs, precision=4)})"


@dataclass(frozen=True, eq=False)
class EmpiricalCounts:
    counts: np.ndarray
    n: Optional[int] = None

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 1 or not np.all(np.equal(np.mod(c, 1), 0)) or np.any(c < 0):
            raise ExpertMixError("counts must be a vector of non-negative integers")
        c = c.astype(np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)
        total = int(c.sum())
        if self.n is None:
            object.__setattr__(self, "n", total)
        elif int(self.n) != total:
            raise ExpertMixError(f"counts sum to {total} but n = {self.n}")


@dataclass(frozen=True)
class MarginalBound:
    index: int
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ExpertMixError(
                f"marginal bound for symptom {self.index} needs 0 <= lo <= hi <= 1,"
                f" got lo={self.lo}, hi={self.hi}")

    @property
    def is_equality(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class ConstraintSet:
    """Expert knowledge: marginal intervals, forbidden cells, minimum active symptoms."""

    marginal_bounds: tuple = ()
    forbidden_cells: frozenset = field(default_factory=frozenset)
    min_present: Optional[int] = None

    def __post_init__(self):
        bounds = tuple(b if isinstance(b, MarginalBound) else MarginalBound(*b)
                       for b in self.marginal_bounds)
        seen = [b.index for b in bounds]
        if len(set(seen)) != len(seen):
            raise ExpertMixError("at most one marginal bound per symptom index")
        object.__setattr__(self, "marginal_bounds", bounds)
        object.__setattr__(self, "forbidden_cells", frozenset(int(c) for c in self.forbidden_cells))
        if self.min_present is not None and self.min_present < 0:
            raise ExpertMixError("min_present must be non-negative")

    @classmethod
    def from_marginals(cls, marginals: Sequence[float], **kwargs) -> "ConstraintSet":
        return cls(tuple(MarginalBound(j, float(m), float(m)) for j, m in enumerate(marginals)),
                   **kwargs)

    def validate(self, space: OutcomeSpace) -> None:
        for b in self.marginal_bounds:
            if not 0 <= b.index < space.symptom_count:
                raise ExpertMixError(
                    f"marginal index {b.index} out of range for {space.symptom_count} symptoms")
        bad = [c for c in self.forbidden_cells if not 0 <= c < space.cell_count]
        if bad:
            raise ExpertMixError(f"forbidden cells out of range: {sorted(bad)}")
        if self.min_present is not None and self.min_present > space.symptom_count:
            raise ExpertMixError("min_present exceeds the number of symptoms")

    def allowed_mask(self, space: OutcomeSpace) -> np.ndarray:
        """Cells not forced to zero by forbidden_cells / min_present."""
        self.validate(space)
        mask = np.ones(space.cell_count, dtype=bool)
        if self.forbidden_cells:
            mask[list(self.forbidden_cells)] = False
        if self.min_present:
            mask &= space.present_counts >= self.min_present
        return mask


ArrayOrDist = Union[Distribution, np.ndarray, Sequence[float]]


def _vec(p: ArrayOrDist) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def _pair(p: ArrayOrDist, q: ArrayOrDist):
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise ExpertMixError(f"mismatched cell counts: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def empirical_distribution(counts: EmpiricalCounts, space: Optional[OutcomeSpace] = None) -> Distribution:
    if counts.n == 0:
        raise ExpertMixError("no samples")
    if space is None:
        space = OutcomeSpace.from_cell_count(len(counts.counts))
    return Distribution(counts.counts / counts.n, space)


def marginal(dist: Distribution, symptom_index: int) -> float:
    J = dist.space.symptom_count
    if not 0 <= symptom_index < J:
        raise ExpertMixError(f"symptom index {symptom_index} out of range [0, {J})")
    return float(dist.probs[dist.space.bits[:, symptom_index]].sum())


def marginals(dist: Distribution) -> np.ndarray:
    """All J marginals at once."""
    return dist.probs @ dist.space.bits


def l1_distance(p: ArrayOrDist, q: ArrayOrDist) -> float:
    a, b = _pair(p, q)
    return float(np.abs(a - b).sum())


def kl_divergence(p: ArrayOrDist, q: ArrayOrDist) -> float:
    """KL(p || q) in nats; 0 log(0/q) = 0 and p_i > 0 = q_i gives +inf."""
    a, b = _pair(p, q)
    return float(rel_entr(a, b).sum())


def entropy(p: ArrayOrDist) -> float:
    a = _vec(p)
    nz = a[a > 0]
    return float(-(nz * np.log(nz)).sum())
