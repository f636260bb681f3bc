import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from avgratio.errors import InvalidInputError, NumericalError, UnsupportedSizeError
from avgratio.mechanism import (
    allocate,
    allocate_oracle,
    best_deviation,
    deviation_cost,
    node_count,
    ratio_from_scaled,
    social_cost,
    unit_gauss_legendre,
)

from .oracles import allocation_by_adaptive_quadrature

costs_strategy = st.lists(
    st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=12,
)


def log_uniform(rng, n, lo=1.0, hi=1e3):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


@pytest.mark.parametrize(
    "t, expected",
    [
        ([1.0], [1.0]),
        ([1.0, 1.0, 1.0], [1 / 3, 1 / 3, 1 / 3]),
        ([1.0, 2.0], [0.75, 0.25]),
        ([2.0, 1.0], [0.25, 0.75]),
    ],
)
def test_allocate_examples(t, expected):
    np.testing.assert_allclose(allocate(t), expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("t", [[1.0, 2.0], [3.0, 1.5, 7.0, 2.2], [5.0, 1.0, 1.0, 40.0, 2.5]])
def test_allocate_matches_adaptive_quadrature(t):
    np.testing.assert_allclose(allocate(t), allocation_by_adaptive_quadrature(t), atol=1e-10)


def test_oracle_examples():
    np.testing.assert_allclose(allocate_oracle([1.0, 2.0]), [0.75, 0.25], atol=1e-14)
    np.testing.assert_array_equal(allocate_oracle([1.0]), [1.0])


def test_oracle_agrees_n8(rng):
    t = rng.uniform(1.0, 10.0, 8)
    np.testing.assert_allclose(allocate(t), allocate_oracle(t), rtol=0, atol=1e-10)


def test_oracle_size_cap():
    with pytest.raises(UnsupportedSizeError):
        allocate_oracle(np.ones(33))


@pytest.mark.parametrize("bad", [[], [1.0, 0.0], [1.0, -2.0], [1.0, float("nan")], [float("inf")], ["x"]])
def test_rejects_bad_costs(bad):
    with pytest.raises(InvalidInputError):
        allocate(bad)
    with pytest.raises(InvalidInputError):
        social_cost(bad)


def test_gauss_legendre_exact_to_degree():
    for n in (2, 3, 8, 17):
        u, w = unit_gauss_legendre(node_count(n))
        assert np.all((u > 0) & (u < 1))
        for d in range(n + 1):
            assert w @ u**d == pytest.approx(1.0 / (d + 1), rel=1e-13)


def test_social_cost_examples():
    out = social_cost([1.0, 2.0])
    assert out.social_cost == pytest.approx(1.25, abs=1e-14)
    assert out.optimal_cost == 1.0
    assert out.ratio == pytest.approx(1.25, abs=1e-14)

    single = social_cost([1.0])
    assert (single.social_cost, single.ratio) == (1.0, 1.0)

    # closed form 3/2 - eps/2 for t = (eps, 1)
    assert social_cost([1e-6, 1.0]).ratio == pytest.approx(1.5 - 5e-7, abs=1e-12)


@pytest.mark.parametrize("n", [2, 5, 16, 64, 256])
def test_fast_social_cost_matches_allocation(rng, n):
    t = log_uniform(rng, n)
    direct = math.fsum(allocate(t) * t)
    assert social_cost(t).social_cost == pytest.approx(direct, rel=1e-9)


def test_ratio_from_scaled_batches_agree(rng):
    r = rng.uniform(0.01, 1.0, (50, 9))
    whole = ratio_from_scaled(r)
    rows = [ratio_from_scaled(row[None, :])[0] for row in r]
    np.testing.assert_allclose(whole, rows, rtol=1e-14)


def test_large_n_probabilities_normalized(rng):
    t = log_uniform(rng, 4096)
    p = allocate(t)
    assert abs(p.sum() - 1.0) < 1e-9
    with pytest.raises(UnsupportedSizeError):
        allocate(np.ones(4097))


@given(costs_strategy)
def test_normalization_and_range(t):
    p = allocate(t)
    assert abs(math.fsum(p) - 1.0) <= 1e-9
    assert np.all((p >= 0.0) & (p <= 1.0))


@given(costs_strategy, st.randoms(use_true_random=False))
def test_permutation_equivariance(t, random):
    perm = list(range(len(t)))
    random.shuffle(perm)
    p = allocate(t)
    q = allocate([t[i] for i in perm])
    np.testing.assert_allclose(q, p[perm], rtol=0, atol=1e-12)


@given(costs_strategy, st.floats(min_value=1e-3, max_value=1e3))
def test_scale_covariance(t, c):
    np.testing.assert_allclose(allocate(np.multiply(t, c)), allocate(t), rtol=0, atol=1e-10)


@given(costs_strategy)
def test_cheapest_machine_most_likely(t):
    p = allocate(sorted(t))
    assert np.all(p[0] >= p[1:] - 1e-12)


@given(costs_strategy)
def test_equal_costs_equal_probabilities(t):
    t = t + t[:2]
    p = allocate(t)
    for i, ti in enumerate(t):
        same = [p[j] for j, tj in enumerate(t) if tj == ti]
        assert max(same) - min(same) <= 1e-15
        assert p[i] == same[0]


@given(costs_strategy)
def test_worst_case_cap(t):
    out = social_cost(t)
    assert 1.0 <= out.ratio <= (len(t) + 1) / 2 + 1e-9
    assert out.optimal_cost == min(t)
    assert out.ratio == pytest.approx(out.social_cost / out.optimal_cost, rel=1e-15)


@given(st.lists(st.floats(min_value=1.0, max_value=1e3), min_size=1, max_size=16))
def test_oracle_equivalence_property(t):
    np.testing.assert_allclose(allocate(t), allocate_oracle(t), rtol=0, atol=1e-10)


@given(
    st.lists(st.floats(min_value=1e-2, max_value=1e2), min_size=2, max_size=12),
    st.floats(min_value=0.05, max_value=50.0),
)
def test_lemma1_cap_under_event_a(t, h):
    s = sorted(t)
    n = len(s)
    if s[(n + 1) // 2 - 1] <= h * s[0]:
        assert social_cost(t).social_cost <= (2 * h + 1) * s[0] + 1e-9


def test_tightness_n_range():
    for n in range(2, 11):
        ratio = social_cost([1e-6] + [1.0] * (n - 1)).ratio
        assert abs(ratio - (n + 1) / 2) < 1e-3


def test_deviation_examples():
    same = deviation_cost([1.0, 2.0], 0, 1.0)
    assert same.deviated_expected_cost == same.truthful_expected_cost == pytest.approx(0.75)
    assert not same.profitable

    over = deviation_cost([1.0, 2.0], 0, 2.0)
    assert over.deviated_expected_cost == pytest.approx(1.0, abs=1e-12)
    assert over.truthful_expected_cost == pytest.approx(0.75, abs=1e-12)
    assert not over.profitable

    for declared in (0.5, 1.5, 3.0):
        assert not deviation_cost([1.0, 2.0], 1, declared).profitable


def test_deviation_underbid_pays_true_cost():
    report = deviation_cost([1.0, 2.0], 1, 0.5)
    # declaring 0.5 makes machine 1 the cheapest: p = 3/4 on (2, 1) scaled, cost = max(2, 0.5)
    assert report.deviated_expected_cost == pytest.approx(0.75 * 2.0, abs=1e-12)
    assert report.truthful_expected_cost == pytest.approx(0.25 * 2.0, abs=1e-12)


@pytest.mark.parametrize("i, declared", [(2, 1.0), (-1, 1.0), (0, 0.0), (0, -1.0), (0, float("nan"))])
def test_deviation_rejects(i, declared):
    with pytest.raises(InvalidInputError):
        deviation_cost([1.0, 2.0], i, declared)


def test_best_deviation_examples():
    grid = np.geomspace(0.01, 100.0, 50)
    assert not best_deviation([1.0, 2.0], 0, grid).profitable
    for i in range(5):
        assert not best_deviation([1.0] * 5, i, grid).profitable
    ident = best_deviation([1.0, 2.0], 0, [1.0])
    assert ident.declared_cost == 1.0
    assert ident.deviated_expected_cost == ident.truthful_expected_cost
    with pytest.raises(InvalidInputError):
        best_deviation([1.0, 2.0], 0, [])


def test_truthfulness_random_instances(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        t = log_uniform(rng, n, 0.1, 10.0)
        grid = np.geomspace(t.min() / 100, 100 * t.max(), 100)
        i = int(rng.integers(n))
        report = best_deviation(t, i, grid)
        assert not report.profitable
        assert report.deviated_expected_cost >= report.truthful_expected_cost - 1e-9


def test_inconsistent_probabilities_raise(monkeypatch):
    from avgratio import mechanism

    monkeypatch.setattr(mechanism, "_tie_average", lambda t, p: p * 1.01)
    with pytest.raises(NumericalError):
        allocate([1.0, 2.0])
