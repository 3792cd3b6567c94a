import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from expertmix.model import (
    ConstraintSet,
    Distribution,
    EmpiricalCounts,
    ExpertMixError,
    MarginalBound,
    OutcomeSpace,
    empirical_distribution,
    kl_divergence,
    l1_distance,
    marginal,
    marginals,
)
from expertmix.maxent import independent_product

S2 = OutcomeSpace(2)


def test_outcome_space_encoding():
    space = OutcomeSpace(3)
    assert space.cell_count == 8
    # cell 6 = 0b110: symptoms 1 and 2 present, symptom 0 absent
    assert list(space.bits[6]) == [False, True, True]
    assert space.bitmask(6) == "110"
    assert list(space.present_counts) == [0, 1, 1, 2, 1, 2, 2, 3]


@pytest.mark.parametrize("J", [0, -1, 21])
def test_outcome_space_rejects_bad_sizes(J):
    with pytest.raises(ExpertMixError):
        OutcomeSpace(J)


def test_from_cell_count():
    assert OutcomeSpace.from_cell_count(16).symptom_count == 4
    with pytest.raises(ExpertMixError):
        OutcomeSpace.from_cell_count(12)


def test_distribution_rejects_off_simplex():
    with pytest.raises(ExpertMixError):
        Distribution([0.5, 0.5, 0.1, 0.0], S2)
    with pytest.raises(ExpertMixError):
        Distribution([1.2, -0.2, 0.0, 0.0], S2)
    with pytest.raises(ExpertMixError):
        Distribution([0.5, 0.5], S2)
    # within the 1e-9 sum tolerance is accepted as is
    d = Distribution([0.25, 0.25, 0.25, 0.25 + 5e-10], S2)
    assert d.probs[3] == 0.25 + 5e-10


def test_distribution_is_immutable():
    d = Distribution([0.25] * 4, S2)
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


@pytest.mark.parametrize("counts, expected", [
    ([2, 0, 2, 0], [0.5, 0, 0.5, 0]),
    ([4, 0, 0, 0], [1, 0, 0, 0]),
    ([1, 1, 1, 1], [0.25] * 4),
])
def test_empirical_distribution(counts, expected):
    d = empirical_distribution(EmpiricalCounts(np.array(counts), 4))
    np.testing.assert_array_equal(d.probs, expected)


def test_empirical_no_samples():
    with pytest.raises(ExpertMixError, match="no samples"):
        empirical_distribution(EmpiricalCounts(np.zeros(4, dtype=int)))


def test_counts_must_sum_to_n():
    with pytest.raises(ExpertMixError):
        EmpiricalCounts(np.array([1, 2, 3, 4]), 11)
    with pytest.raises(ExpertMixError):
        EmpiricalCounts(np.array([1.5, 2, 3, 4]))


def test_marginal_values():
    assert marginal(Distribution([0.25] * 4, S2), 0) == 0.5
    d = Distribution([0.21, 0.49, 0.09, 0.21], S2)
    # brute-force enumeration of cells with the symptom's bit set
    for j in range(2):
        expected = sum(d.probs[i] for i in range(4) if (i >> j) & 1)
        assert marginal(d, j) == pytest.approx(expected, abs=1e-15)
    assert marginal(d, 0) == pytest.approx(0.7)
    assert marginal(d, 1) == pytest.approx(0.3)
    point = Distribution(np.eye(8)[7], OutcomeSpace(3))
    assert all(marginal(point, j) == 1.0 for j in range(3))
    with pytest.raises(ExpertMixError):
        marginal(d, 2)


def test_distances_examples():
    p = Distribution([0.5, 0.5], OutcomeSpace(1))
    q = Distribution([0.25, 0.75], OutcomeSpace(1))
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence(p, q) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3), abs=1e-15)
    assert l1_distance([1, 0], [0, 1]) == 2.0
    assert kl_divergence([1, 0], [0, 1]) == math.inf
    assert kl_divergence([0, 1], [0.5, 0.5]) == pytest.approx(math.log(2))
    with pytest.raises(ExpertMixError):
        l1_distance([1, 0], [1, 0, 0, 0])


def simplex_vectors(K, allow_zeros=True):
    lo = 0.0 if allow_zeros else 1e-3
    return arrays(np.float64, K, elements=st.floats(lo, 1.0)).filter(lambda x: x.sum() > 0).map(
        lambda x: x / x.sum())


@settings(max_examples=200, deadline=None)
@given(simplex_vectors(8), simplex_vectors(8))
def test_kl_nonnegative(p, q):
    v = kl_divergence(p, q)
    assert v >= -1e-12
    assert kl_divergence(p, p) == 0.0
    if v == 0.0:
        np.testing.assert_allclose(p, q, atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(simplex_vectors(6), simplex_vectors(6), simplex_vectors(6))
def test_l1_symmetric_and_triangle(p, q, r):
    assert l1_distance(p, q) == pytest.approx(l1_distance(q, p), abs=0)
    assert l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda J: st.lists(st.floats(0, 1), min_size=J, max_size=J)))
def test_product_marginals_round_trip(m):
    space = OutcomeSpace(len(m))
    d = independent_product(m, space)
    np.testing.assert_allclose(marginals(d), m, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(arrays(np.int64, 8, elements=st.integers(0, 50)).filter(lambda c: c.sum() > 0))
def test_empirical_always_valid(c):
    d = empirical_distribution(EmpiricalCounts(c))
    assert np.all(d.probs >= 0) and abs(d.probs.sum() - 1) <= 1e-9


def test_constraint_set_validation():
    with pytest.raises(ExpertMixError):
        MarginalBound(0, 0.6, 0.4)
    with pytest.raises(ExpertMixError):
        ConstraintSet(((0, 0.1, 0.2), (0, 0.3, 0.4)))
    cs = ConstraintSet(((2, 0.1, 0.2),))
    with pytest.raises(ExpertMixError):
        cs.validate(S2)
    with pytest.raises(ExpertMixError):
        ConstraintSet(forbidden_cells={4}).validate(S2)


def test_allowed_mask():
    cs = ConstraintSet(forbidden_cells={3}, min_present=1)
    assert list(cs.allowed_mask(S2)) == [False, True, True, False]
