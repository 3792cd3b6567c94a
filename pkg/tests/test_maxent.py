import numpy as np
import pytest

from expertmix.maxent import (
    check_feasibility,
    constraint_residuals,
    independent_product,
    solve_maxent,
)
from expertmix.model import (
    ConstraintSet,
    ExpertMixError,
    InfeasibleConstraintsError,
    OutcomeSpace,
    entropy,
    l1_distance,
    marginals,
)
from expertmix.oracles import dykstra_project, maxent_oracle

S2 = OutcomeSpace(2)


def test_unconstrained_is_uniform():
    sol = solve_maxent(ConstraintSet(), S2)
    np.testing.assert_allclose(sol.distribution.probs, 0.25, atol=1e-15)
    assert sol.converged and sol.entropy == pytest.approx(np.log(4))


def test_two_marginals_give_product():
    # bit 0 = symptom 0: cell 1 has only symptom 0 (0.3 * 0.3), cell 2 only symptom 1 (0.7 * 0.7)
    expected = [0.7 * 0.3, 0.3 * 0.3, 0.7 * 0.7, 0.3 * 0.7]
    sol = solve_maxent(ConstraintSet.from_marginals([0.3, 0.7]), S2)
    np.testing.assert_allclose(sol.distribution.probs, expected, atol=1e-12)
    np.testing.assert_allclose(independent_product([0.3, 0.7], S2).probs, expected, atol=1e-15)


def test_product_edge_cases():
    np.testing.assert_allclose(independent_product([0.5] * 3, OutcomeSpace(3)).probs, 1 / 8)
    np.testing.assert_array_equal(independent_product([1, 1, 1], OutcomeSpace(3)).probs, np.eye(8)[7])
    with pytest.raises(ExpertMixError):
        independent_product([0.5, 1.2], S2)
    with pytest.raises(ExpertMixError):
        independent_product([0.5], S2)


def test_forbidden_all_absent_matches_oracle():
    cs = ConstraintSet.from_marginals([0.6, 0.6], min_present=1)
    sol = solve_maxent(cs, S2)
    oracle = maxent_oracle(cs, S2)
    assert sol.distribution.probs[0] == 0.0
    assert l1_distance(sol.distribution, oracle) <= 1e-6
    # p1 + p3 = p2 + p3 = 0.6 and p1 + p2 + p3 = 1 leave a single feasible point
    np.testing.assert_allclose(sol.distribution.probs, [0, 0.4, 0.4, 0.2], atol=1e-9)


def test_interval_with_forbidden_cell_dense_scan():
    cs = ConstraintSet(((0, 0.5, 0.7), (1, 0.6, 0.6)), min_present=1)
    sol = solve_maxent(cs, S2)
    # p2 + p3 = 0.6, p1 = 0.4, p1 + p3 in [0.5, 0.7]  =>  p3 = t in [0.1, 0.3], p2 = 0.6 - t
    t = np.linspace(0.1, 0.3, 400_001)
    H = -(0.4 * np.log(0.4) + (0.6 - t) * np.log(0.6 - t) + t * np.log(t))
    assert sol.entropy == pytest.approx(H.max(), abs=1e-10)
    assert sol.distribution.probs[3] == pytest.approx(t[H.argmax()], abs=1e-6)


@pytest.mark.parametrize("J", [1, 3, 6, 10])
def test_marginals_only_reduces_to_product(J, rng):
    m = rng.uniform(0.02, 0.98, J)
    space = OutcomeSpace(J)
    sol = solve_maxent(ConstraintSet.from_marginals(m), space)
    assert l1_distance(sol.distribution, independent_product(m, space)) <= 1e-8


def _random_constraints(rng, J, intervals=False):
    space = OutcomeSpace(J)
    K = space.cell_count
    while True:
        q = rng.dirichlet(np.ones(K))
        forbidden = set(rng.choice(K, size=rng.integers(1, K // 3 + 1), replace=False).tolist())
        q[list(forbidden)] = 0
        q /= q.sum()
        m = q @ space.bits
        if intervals:
            w = rng.uniform(0, 0.1, J)
            bounds = tuple((j, max(0.0, m[j] - w[j]), min(1.0, m[j] + w[j])) for j in range(J))
        else:
            bounds = tuple((j, float(m[j]), float(m[j])) for j in range(J))
        cs = ConstraintSet(bounds, frozenset(forbidden))
        # keep instances whose feasible set has an interior on the allowed cells
        if np.all(q[cs.allowed_mask(space)] > 1e-3):
            return cs, space


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("intervals", [False, True])
def test_oracle_equivalence(seed, intervals):
    rng = np.random.default_rng(seed)
    cs, space = _random_constraints(rng, J=int(rng.integers(2, 5)), intervals=intervals)
    sol = solve_maxent(cs, space)
    oracle = maxent_oracle(cs, space)
    assert sol.converged
    assert sol.max_constraint_residual <= 1e-8
    assert l1_distance(sol.distribution, oracle) <= 1e-6
    assert sol.entropy >= entropy(oracle) - 1e-8
    assert np.all(sol.distribution.probs[list(cs.forbidden_cells)] == 0.0)


@pytest.mark.parametrize("intervals", [False, True])
def test_entropy_dominates_random_feasible_points(intervals):
    rng = np.random.default_rng(11)
    cs, space = _random_constraints(rng, J=3, intervals=intervals)
    sol = solve_maxent(cs, space)
    for _ in range(200):
        q = dykstra_project(rng.normal(0, 0.3, space.cell_count), cs, space)
        assert max(constraint_residuals(q, cs, space).values()) <= 1e-9
        assert sol.entropy >= entropy(np.clip(q, 0, None)) - 1e-8


def test_different_starting_floors_agree():
    rng = np.random.default_rng(3)
    cs, space = _random_constraints(rng, J=4)
    a = solve_maxent(cs, space).distribution
    # perturbing the entropy tolerance changes the iteration path only
    b = solve_maxent(cs, space, entropy_tol=1e-15).distribution
    assert l1_distance(a, b) <= 1e-8


def test_interval_inactive_bounds_leave_uniform():
    cs = ConstraintSet(((0, 0.2, 0.8), (1, 0.0, 1.0)))
    sol = solve_maxent(cs, S2)
    np.testing.assert_allclose(sol.distribution.probs, 0.25, atol=1e-15)


def test_interval_snaps_to_nearest_endpoint():
    cs = ConstraintSet(((0, 0.7, 0.9),))
    sol = solve_maxent(cs, OutcomeSpace(3))
    m = marginals(sol.distribution)
    assert m[0] == pytest.approx(0.7, abs=1e-12)
    np.testing.assert_allclose(m[1:], 0.5, atol=1e-12)


def test_degenerate_marginals():
    space = OutcomeSpace(3)
    cs = ConstraintSet(((0, 1.0, 1.0), (1, 0.0, 0.0), (2, 0.25, 0.25)))
    sol = solve_maxent(cs, space)
    np.testing.assert_allclose(marginals(sol.distribution), [1.0, 0.0, 0.25], atol=1e-15)
    assert set(np.flatnonzero(sol.distribution.probs)) == {1, 5}


@pytest.mark.parametrize("cs", [
    ConstraintSet(((0, 1.0, 1.0),), forbidden_cells=frozenset({1, 3})),
    ConstraintSet(((0, 0.5, 0.5),), min_present=2),
    ConstraintSet(((0, 0.9, 0.9), (1, 0.9, 0.9)), forbidden_cells=frozenset({3})),
    ConstraintSet(forbidden_cells=frozenset(range(4))),
])
def test_infeasible(cs):
    report = check_feasibility(cs, S2)
    assert not report.feasible and report.witness is None
    with pytest.raises(InfeasibleConstraintsError, match="infeasible constraints"):
        solve_maxent(cs, S2)


def test_feasibility_witness(rng):
    m = rng.uniform(0, 1, 4)
    space = OutcomeSpace(4)
    cs = ConstraintSet.from_marginals(m)
    report = check_feasibility(cs, space)
    assert report.feasible
    np.testing.assert_allclose(marginals(report.witness), m, atol=1e-9)
