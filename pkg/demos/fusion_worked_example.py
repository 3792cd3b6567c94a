"""The two fused estimators on a four-cell toy problem.

Expert: uniform over two binary symptoms. Data: half the patients have
neither symptom and half have only the second. With an L1 radius of 0.9 the
barycenter moves one tenth of the way from the data towards the expert.
"""

import numpy as np

from expertmix import Distribution, OutcomeSpace, kl_centroid, l1_barycenter, l1_distance
from expertmix.model import kl_divergence

space = OutcomeSpace(2)
expert = Distribution([0.25, 0.25, 0.25, 0.25], space)
emp = Distribution([0.5, 0.0, 0.5, 0.0], space)

r = l1_barycenter(expert, emp, 0.9)
print("L1 barycenter x 40:", np.round(r.estimate.probs * 40, 12), "alpha =", r.mix_weight)

# The L1 problem has many minimisers; here is another one off the segment.
alt = Distribution(np.array([10, 9, 12, 9]) / 40, space)
print("alternative point: distance to data", l1_distance(alt, emp),
      "distance to expert", l1_distance(alt, expert))

# The KL centroid on the same inputs, for a range of radii.
D = kl_divergence(emp, expert)
print(f"KL(emp || expert) = {D:.4f}")
for eps in (0.0, 0.1 * D, 0.5 * D, D):
    k = kl_centroid(expert, emp, eps)
    print(f"eps = {eps:.4f}: weight on expert {k.mix_weight:.6f}, "
          f"lambda_tilde {k.lambda_tilde:.6g}, estimate {np.round(k.estimate.probs, 4)}")
