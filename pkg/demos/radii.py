"""How large must the data ball be?

The fused estimators trust the empirical distribution only up to a radius
epsilon_n that shrinks with the sample size. This prints the three radius
formulas side by side for the 128-cell problem (seven symptoms).
"""

from expertmix import epsilon_kl_conjecture, epsilon_kl_exact, epsilon_l1_conjecture

K, delta = 128, 1e-6
print(f"K = {K}, delta = {delta:g}")
print(f"{'n':>6} {'KL exact':>10} {'KL conj':>10} {'L1 conj':>10}")
for n in (1, 10, 50, 100, 500, 2000, 10000):
    print(f"{n:>6} {epsilon_kl_exact(n, K, delta):>10.4f} "
          f"{epsilon_kl_conjecture(n, K, delta):>10.4f} {epsilon_l1_conjecture(n, K, delta):>10.4f}")

# The exact bound is the conservative one only once n is comparable to K;
# for very small n it drops below the conjectured radius.
for n in (10, 64, 100):
    print(f"n={n}: exact >= conjecture? {epsilon_kl_exact(n, K, delta) >= epsilon_kl_conjecture(n, K, delta)}")
