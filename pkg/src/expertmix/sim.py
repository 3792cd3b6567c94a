"""Monte-Carlo harness: error trajectories versus sample size, and coverage.

Randomness
----------
Replication ``r`` draws from its own generator,
``numpy.random.Generator(PCG64(SeedSequence([master_seed, r])))``, so
results do not depend on worker count or execution order. Within a
replication the draws happen in a fixed order: the target (K uniforms),
then J Gaussian marginal perturbations per noisy prior in ``sigma2`` order,
then ``n_max`` i.i.d. cell indices from the target.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

from .concentration import epsilon_kl_conjecture, epsilon_kl_exact, epsilon_l1_conjecture
from .fusion import kl_centroid_weight, l1_mix_weight, theorem1_check, theorem2_check
from .io import atomic_write_text, format_float
from .maxent import solve_maxent
from .model import (
    ConstraintSet,
    Distribution,
    ExpertMixError,
    OutcomeSpace,
    kl_divergence,
    l1_distance,
    marginals,
)

DEFAULT_CHECKPOINTS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000)
ESTIMATORS = ("kl_centroid", "l1_barycenter", "empirical", "expert")
METRICS = ("kl", "l1")
MARGINAL_CLIP = (0.01, 0.99)
EXACT_PRIOR_ID = 4


@dataclass(frozen=True)
class SimulationConfig:
    """Experiment settings. ``sigma2`` holds noise *variances*.

    ``variant`` selects the KL radius ("conjecture" or "exact"); the L1
    barycenter always uses the conjecture L1 radius.
    """

    J: int = 7
    sigma2: tuple = (0.1, 0.2, 0.4)
    include_exact_prior: bool = True
    delta: float = 1e-6
    variant: str = "conjecture"
    n_max: int = 2000
    checkpoints: Optional[tuple] = None
    replications: int = 50
    master_seed: int = 42

    def __post_init__(self):
        if self.J < 1:
            raise ExpertMixError("J must be >= 1")
        if self.variant not in ("conjecture", "exact"):
            raise ExpertMixError(f"unknown variant {self.variant!r}")
        if any(s < 0 for s in self.sigma2):
            raise ExpertMixError("sigma2 values must be non-negative")
        if not (0.0 < self.delta <= 1.0):
            raise ExpertMixError("delta must lie in (0, 1]")
        if self.replications < 1 or self.n_max < 1:
            raise ExpertMixError("replications and n_max must be >= 1")
        object.__setattr__(self, "sigma2", tuple(float(s) for s in self.sigma2))
        cps = self.checkpoints
        if cps is None:
            cps = tuple(c for c in DEFAULT_CHECKPOINTS if c <= self.n_max)
        cps = tuple(int(c) for c in cps)
        if list(cps) != sorted(set(cps)) or not cps or cps[0] < 1 or cps[-1] > self.n_max:
            raise ExpertMixError("checkpoints must be strictly increasing within [1, n_max]")
        object.__setattr__(self, "checkpoints", cps)

    @property
    def K(self) -> int:
        return 1 << self.J

    @property
    def prior_ids(self) -> tuple:
        ids = tuple(range(1, len(self.sigma2) + 1))
        return ids + (EXACT_PRIOR_ID,) if self.include_exact_prior else ids

    def kl_radius(self, n: int) -> float:
        f = epsilon_kl_exact if self.variant == "exact" else epsilon_kl_conjecture
        return f(n, self.K, self.delta)

    def l1_radius(self, n: int) -> float:
        return epsilon_l1_conjecture(n, self.K, self.delta)


class TrajectoryRecord(NamedTuple):
    rep: int
    prior: int
    n: int
    estimator: str
    metric: str
    value: float


def replication_rng(master_seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, rep])))


def sample_target(J: int, rng: np.random.Generator) -> Distribution:
    """Normalised i.i.d. uniforms on K = 2**J cells; every entry is > 0."""
    space = OutcomeSpace(J)
    u = 1.0 - rng.random(space.cell_count)   # (0, 1]
    return Distribution(u / u.sum(), space)


def noisy_expert_prior(p_star: Distribution, sigma2: float, rng: np.random.Generator) -> Distribution:
    """Maxent prior from the target's marginals plus N(0, sigma2) noise, clipped."""
    if sigma2 < 0:
        raise ExpertMixError("sigma2 must be non-negative")
    m = marginals(p_star) + rng.normal(0.0, math.sqrt(sigma2), p_star.space.symptom_count)
    m = np.clip(m, *MARGINAL_CLIP)
    return solve_maxent(ConstraintSet.from_marginals(m), p_star.space).distribution


def _priors(config: SimulationConfig, p_star, rng) -> dict:
    priors = {k: noisy_expert_prior(p_star, s, rng) for k, s in enumerate(config.sigma2, start=1)}
    if config.include_exact_prior:
        priors[EXACT_PRIOR_ID] = p_star
    return priors


def _estimates(expert, emp, eps_kl, eps_l1):
    e, m = expert.probs, emp.probs
    w = kl_centroid_weight(e, m, eps_kl)[0]
    a = l1_mix_weight(e, m, eps_l1)
    space = expert.space
    return {
        "kl_centroid": expert if w == 1.0 else Distribution(w * e + (1 - w) * m, space),
        "l1_barycenter": expert if a == 1.0 else Distribution(a * e + (1 - a) * m, space),
        "empirical": emp,
        "expert": expert,
    }


def run_replication(config: SimulationConfig, rep: int) -> list:
    rng = replication_rng(config.master_seed, rep)
    p_star = sample_target(config.J, rng)
    priors = _priors(config, p_star, rng)
    samples = rng.choice(config.K, size=config.n_max, p=p_star.probs)
    out = []
    for n in config.checkpoints:
        emp = Distribution(np.bincount(samples[:n], minlength=config.K) / n, p_star.space)
        eps_kl, eps_l1 = config.kl_radius(n), config.l1_radius(n)
        for pid in config.prior_ids:
            est = _estimates(priors[pid], emp, eps_kl, eps_l1)
            for name in ESTIMATORS:
                out.append(TrajectoryRecord(rep, pid, n, name, "kl", kl_divergence(est[name], p_star)))
                out.append(TrajectoryRecord(rep, pid, n, name, "l1", l1_distance(est[name], p_star)))
    return out


def _run_one(args):
    return run_replication(*args)


def run_trajectory(config: SimulationConfig, workers: int = 1) -> Iterator[TrajectoryRecord]:
    """Yield records replication by replication, in replication order."""
    jobs = [(config, r) for r in range(config.replications)]
    if workers <= 1:
        for job in jobs:
            yield from _run_one(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for recs in pool.map(_run_one, jobs):
            yield from recs


def trajectory_csv(records: Iterable[TrajectoryRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TrajectoryRecord._fields)
    for r in records:
        w.writerow([r.rep, r.prior, r.n, r.estimator, r.metric, format_float(r.value)])
    return buf.getvalue()


def write_trajectory_csv(records: Iterable[TrajectoryRecord], path) -> None:
    atomic_write_text(path, trajectory_csv(records))


def mean_errors(records: Iterable[TrajectoryRecord]) -> dict:
    """Average over replications: ``{(prior, n, estimator, metric): mean}``."""
    sums, counts = {}, {}
    for r in records:
        key = (r.prior, r.n, r.estimator, r.metric)
        sums[key] = sums.get(key, 0.0) + r.value
        counts[key] = counts.get(key, 0) + 1
    return {k: sums[k] / counts[k] for k in sums}


@dataclass
class CoverageReport:
    n: int
    K: int
    delta: float
    variant: str
    replications: int
    kl_radius: float
    l1_radius: float
    kl_event_failures: int
    l1_event_failures: int
    theorem1_checked: int
    theorem1_violations: int
    theorem2_checked: int
    theorem2_violations: int
    theorem2_expert_branch_violations: int
    theorem2_rate_branch_violations: int

    @property
    def kl_failure_rate(self) -> float:
        return self.kl_event_failures / self.replications

    @property
    def l1_failure_rate(self) -> float:
        return self.l1_event_failures / self.replications

    @property
    def allowed_failure_rate(self) -> float:
        """delta plus three binomial standard errors."""
        d = self.delta
        return d + 3.0 * math.sqrt(d * (1.0 - d) / self.replications)

    @property
    def coverage_ok(self) -> Optional[bool]:
        """Only the exact KL radius carries a guarantee; None otherwise."""
        if self.variant != "exact":
            return None
        return self.kl_failure_rate <= self.allowed_failure_rate

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(kl_failure_rate=self.kl_failure_rate, l1_failure_rate=self.l1_failure_rate,
                 allowed_failure_rate=self.allowed_failure_rate, coverage_ok=self.coverage_ok)
        return d


def _coverage_replication(args):
    config, rep = args
    n = config.checkpoints[-1]
    rng = replication_rng(config.master_seed, rep)
    p_star = sample_target(config.J, rng)
    priors = _priors(config, p_star, rng)
    samples = rng.choice(config.K, size=n, p=p_star.probs)
    emp = Distribution(np.bincount(samples, minlength=config.K) / n, p_star.space)
    eps_kl, eps_l1 = config.kl_radius(n), config.l1_radius(n)
    kl_event = kl_divergence(emp, p_star) <= eps_kl
    l1_event = l1_distance(emp, p_star) <= eps_l1
    tally = np.zeros(6, dtype=int)
    for expert in priors.values():
        est = _estimates(expert, emp, eps_kl, eps_l1)
        if l1_event:
            t1 = theorem1_check(p_star, expert, emp, eps_l1, est["l1_barycenter"])
            tally[0] += 1
            tally[1] += not t1.bound_holds
        if kl_event:
            t2 = theorem2_check(p_star, expert, emp, eps_kl, est["kl_centroid"])
            tally[2] += 1
            tally[3] += not t2.bound_holds
            tally[4] += not t2.expert_branch_holds
            tally[5] += not t2.rate_branch_holds and not t2.trivial
    return not kl_event, not l1_event, tally


def run_coverage(config: SimulationConfig, workers: int = 1) -> CoverageReport:
    """Event-failure frequencies at n = last checkpoint, plus theorem checks under the events."""
    jobs = [(config, r) for r in range(config.replications)]
    if workers <= 1:
        results = [_coverage_replication(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_coverage_replication, jobs, chunksize=64))
    kl_fail = sum(r[0] for r in results)
    l1_fail = sum(r[1] for r in results)
    t = sum((r[2] for r in results), np.zeros(6, dtype=int))
    n = config.checkpoints[-1]
    return CoverageReport(n, config.K, config.delta, config.variant, config.replications,
                          config.kl_radius(n), config.l1_radius(n), int(kl_fail), int(l1_fail),
                          *(int(x) for x in t))
