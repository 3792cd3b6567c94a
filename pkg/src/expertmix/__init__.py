"""Estimate a discrete distribution by fusing an expert prior with data.

The expert prior is the maximum-entropy distribution under marginal and
support constraints; it is combined with the empirical distribution by
taking the point closest to the prior among those that stay within a
concentration radius of the data (in L1 or KL geometry).
"""

from .concentration import (
    ConcentrationSpec,
    Divergence,
    Variant,
    epsilon_kl_conjecture,
    epsilon_kl_exact,
    epsilon_l1_conjecture,
    log_g_n,
)
from .fusion import (
    FusionReport,
    Method,
    fuse,
    kl_centroid,
    l1_barycenter,
    theorem1_check,
    theorem2_check,
)
from .maxent import MaxentSolution, check_feasibility, independent_product, solve_maxent
from .model import (
    ConstraintSet,
    Distribution,
    EmpiricalCounts,
    ExpertMixError,
    InfeasibleConstraintsError,
    MarginalBound,
    OutcomeSpace,
    empirical_distribution,
    entropy,
    kl_divergence,
    l1_distance,
    marginal,
    marginals,
)

__version__ = "0.1.0"
