"""Error versus sample size for the four estimators.

Seven symptoms (128 cells). Each replication draws a random target, three
noisy expert priors (marginal noise variances 0.1, 0.2, 0.4) plus the exact
target as a fourth prior, then a stream of samples. We print mean KL error
of each estimator against the target at each checkpoint.

Run time is a few seconds for the default 20 replications.
"""

import sys

from expertmix.sim import ESTIMATORS, SimulationConfig, mean_errors, run_trajectory

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 20
config = SimulationConfig(J=7, replications=reps, master_seed=42)
mean = mean_errors(run_trajectory(config))

for prior in config.prior_ids:
    label = "exact prior" if prior == 4 else f"sigma2 = {config.sigma2[prior - 1]}"
    print(f"\nprior {prior} ({label}), mean KL(estimate || target)")
    print(f"{'n':>6} " + " ".join(f"{e:>14}" for e in ESTIMATORS))
    for n in config.checkpoints:
        print(f"{n:>6} " + " ".join(f"{mean[(prior, n, e, 'kl')]:>14.4f}" for e in ESTIMATORS))
