"""Build an expert prior from marginal statements.

Three symptoms. The experts say fever is present in 30% of cases, cough in
between 40% and 60%, and that rash never appears without fever (cells with
rash present and fever absent are forbidden). The maximum-entropy prior is
the least committal distribution consistent with those statements.
"""

import numpy as np

from expertmix import ConstraintSet, OutcomeSpace, marginals, solve_maxent
from expertmix.maxent import independent_product

space = OutcomeSpace(3, ("fever", "cough", "rash"))
rash_without_fever = [c for c in range(space.cell_count)
                      if space.bits[c, 2] and not space.bits[c, 0]]
constraints = ConstraintSet(
    marginal_bounds=((0, 0.3, 0.3), (1, 0.4, 0.6)),
    forbidden_cells=frozenset(rash_without_fever),
)

sol = solve_maxent(constraints, space)
print(f"converged in {sol.iterations} cycles, entropy {sol.entropy:.6f} nats")
print("cell  fever cough rash  prob")
for c, p in enumerate(sol.distribution.probs):
    flags = "".join(f"{int(b):<6}" for b in space.bits[c])
    print(f"{c:>4}  {flags}{p:.6f}")
print("marginals:", np.round(marginals(sol.distribution), 6))

# With marginals only, the maxent prior is just the product distribution.
m = np.array([0.3, 0.5, 0.2])
plain = solve_maxent(ConstraintSet.from_marginals(m), space).distribution
print("marginals-only prior equals the product:",
      np.allclose(plain.probs, independent_product(m, space).probs, atol=1e-12))
