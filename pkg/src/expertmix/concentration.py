"""Concentration radii for the empirical distribution.

Each radius ``eps`` is chosen so that the empirical distribution of ``n``
draws lies within ``eps`` of the truth, in KL (``KL(emp || p*)``) or L1,
with probability at least ``1 - delta``. All logarithms are natural.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import ExpertMixError

DEFAULT_DELTA = 1e-6


class Divergence(str, enum.Enum):
    KL = "kl"
    L1 = "l1"


class Variant(str, enum.Enum):
    EXACT_KL = "exact_kl"
    CONJECTURE_KL = "conjecture_kl"
    CONJECTURE_L1 = "conjecture_l1"


_DIVERGENCE_OF = {
    Variant.EXACT_KL: Divergence.KL,
    Variant.CONJECTURE_KL: Divergence.KL,
    Variant.CONJECTURE_L1: Divergence.L1,
}


def _check(n, K, delta):
    if int(n) != n or n < 1:
        raise ExpertMixError(f"n must be an integer >= 1, got {n}")
    if int(K) != K or K < 2:
        raise ExpertMixError(f"K must be an integer >= 2, got {K}")
    if not (0.0 < delta <= 1.0):
        raise ExpertMixError(f"delta must lie in (0, 1], got {delta}")


def log_g_n(n: int, K: int) -> float:
    """log of ``3 + 3 * sum_{i=1}^{K-2} (e^3 n / (2 pi i))^(i/2)``, evaluated in log-space."""
    _check(n, K, 1.0)
    i = np.arange(1, K - 1, dtype=float)
    if i.size == 0:
        return math.log(3.0)
    terms = 0.5 * i * (3.0 + math.log(n) - np.log(2.0 * math.pi * i))
    return float(logsumexp(np.concatenate(([0.0], terms))) + math.log(3.0))


def epsilon_kl_exact(n: int, K: int, delta: float) -> float:
    _check(n, K, delta)
    return (-math.log(delta) + log_g_n(n, K)) / n


def epsilon_kl_conjecture(n: int, K: int, delta: float) -> float:
    _check(n, K, delta)
    return (-math.log(delta) + 0.5 * n * math.log1p((K - 1) / n)) / n


def epsilon_l1_conjecture(n: int, K: int, delta: float) -> float:
    return math.sqrt(epsilon_kl_conjecture(n, K, delta))


_RADIUS = {
    Variant.EXACT_KL: epsilon_kl_exact,
    Variant.CONJECTURE_KL: epsilon_kl_conjecture,
    Variant.CONJECTURE_L1: epsilon_l1_conjecture,
}


@dataclass(frozen=True)
class ConcentrationSpec:
    divergence: Divergence = Divergence.KL
    delta: float = DEFAULT_DELTA
    variant: Variant = Variant.CONJECTURE_KL

    def __post_init__(self):
        object.__setattr__(self, "divergence", Divergence(self.divergence))
        object.__setattr__(self, "variant", Variant(self.variant))
        if _DIVERGENCE_OF[self.variant] is not self.divergence:
            raise ExpertMixError(
                f"variant {self.variant.value} does not bound the {self.divergence.value} divergence")
        if not (0.0 < self.delta <= 1.0):
            raise ExpertMixError(f"delta must lie in (0, 1], got {self.delta}")

    @classmethod
    def for_method(cls, divergence, delta=DEFAULT_DELTA, exact=False) -> "ConcentrationSpec":
        """Spec from a divergence plus an exact/conjecture switch.

        Only KL has an exact variant; asking for one in L1 raises.
        """
        divergence = Divergence(divergence)
        if divergence is Divergence.KL:
            variant = Variant.EXACT_KL if exact else Variant.CONJECTURE_KL
        elif exact:
            raise ExpertMixError("no exact radius is available for the L1 divergence")
        else:
            variant = Variant.CONJECTURE_L1
        return cls(divergence, delta, variant)

    def radius(self, n: int, K: int) -> float:
        return _RADIUS[self.variant](n, K, self.delta)
