import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from radbound.covermetrics import (
    CountBound,
    CoverIndex,
    CoverSearchError,
    cover_rows_csv,
    covering_number,
    empirical_distance,
    is_valid_cover,
    metric_capacity_probe,
    packing_number,
    proper_cover,
    verify_minus_lemma,
    verify_subfamily_lemma,
)
from radbound.family_lab import ConstantFamily, FiniteRandom, LinearBall, SamplePlan, draw_sample, from_table, project


def brute_cover_size(values, eps):
    d = np.sqrt(((values[:, None, :] - values[None, :, :]) ** 2).mean(axis=2))
    m = len(values)
    for size in range(1, m + 1):
        for subset in itertools.combinations(range(m), size):
            if np.all(d[:, list(subset)].min(axis=1) <= eps * (1 + 1e-12)):
                return size


def test_empirical_distance():
    assert empirical_distance([1, 2], [1, 2]) == 0
    assert empirical_distance([1, 1], [0, 0]) == 1
    assert empirical_distance([0.6, 0], [0, 0.8]) == pytest.approx(0.7071067811865476)
    with pytest.raises(ValueError):
        empirical_distance([1], [0], q=0.5)


def test_proper_cover_examples():
    pf = from_table([[0.0], [0.3], [0.6]])
    res = proper_cover(pf, 0.3)
    assert res.size == 1 and res.member_indices == (1,)
    assert proper_cover(from_table([[0.0], [0.4], [0.8]]), 0.3).size == 3
    rng = np.random.default_rng(0)
    pf = from_table(rng.uniform(-1, 1, (9, 4)))
    assert proper_cover(pf, 10.0).size == 1


def test_exact_limit():
    pf = from_table(np.random.default_rng(1).uniform(-1, 1, (17, 3)))
    with pytest.raises(CoverSearchError):
        proper_cover(pf, 0.1, mode="exact")
    assert proper_cover(pf, 0.1, mode="greedy").mode == "greedy"


@pytest.mark.parametrize("seed", range(8))
def test_counts_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    values = from_table(rng.uniform(-1, 1, (int(rng.integers(2, 12)), 3))).values
    for eps in (0.2, 0.5, 0.8):
        exact = covering_number(values, eps)
        assert exact.kind == "exact" and exact.value == brute_cover_size(values, eps)
        assert covering_number(values, eps, mode="greedy").value >= exact.value
        assert packing_number(values, eps).value <= exact.value


def test_twelve_row_greedy_vs_exact():
    values = np.random.default_rng(12).uniform(-1, 1, (12, 5))
    for eps in np.linspace(0.2, 1.0, 5):
        assert covering_number(values, eps, mode="greedy").value >= covering_number(values, eps).value


def test_small_eps_gives_cardinality():
    pf = from_table(np.random.default_rng(3).uniform(-1, 1, (7, 4)))
    assert covering_number(pf, 1e-9).value == 7


def test_packing_examples():
    assert packing_number(from_table([[0.2, 0.1]]), 0.1).value == 1
    assert packing_number(np.array([[0.0], [1.0]]), 0.4).value == 2
    assert packing_number(np.array([[0.5], [0.5]]), 0.4).value == 1


def test_count_bound_kind_validation():
    with pytest.raises(ValueError):
        CountBound(1, "guess")


def test_lemma_reports():
    single = from_table([[0.4, 0.1]])
    r = verify_minus_lemma(single, 0.3)
    assert (r.lhs, r.rhs, r.holds) == (1, 1, True)
    r = verify_minus_lemma(from_table([[0.0], [0.4], [0.8]]), 0.4)
    assert r.holds and r.lhs <= r.rhs
    rng = np.random.default_rng(6)
    pf = from_table(rng.uniform(-1, 1, (6, 3)))
    for eps in (0.3, 0.6, 1.2):
        assert verify_minus_lemma(pf, eps).holds
    pf8 = from_table(rng.uniform(-1, 1, (8, 3)))
    assert verify_subfamily_lemma(pf8, range(8), 0.5).holds
    assert verify_subfamily_lemma(pf8, [3], 0.5).lhs == 1
    assert verify_subfamily_lemma(pf8, rng.choice(8, 4, replace=False), 0.4).holds


def test_metric_capacity_probe():
    assert metric_capacity_probe(ConstantFamily((0.0,)), 0.1, trials=5).value == 1
    assert metric_capacity_probe(FiniteRandom(m=4, seed=2), 1e-6, trials=5, n_range=(4, 8)).value == 4
    probe = metric_capacity_probe(LinearBall(d=2), 0.25, trials=50, seed=3)
    w = probe.witness
    pf = project(LinearBall(d=2), draw_sample(SamplePlan(n=w["n"], dim=2, seed=w["sample_seed"])))
    assert packing_number(pf, 0.25).value == probe.value


def test_cover_csv():
    text = cover_rows_csv([("fam", 0.5, 2.0, "exact", 3)])
    assert text == "family_id,eps,q,mode,count\nfam,0.5,2.0,exact,3\n"


tables = arrays(np.float64, st.tuples(st.integers(1, 9), st.integers(1, 4)), elements=st.floats(-1, 1))


@given(tables, st.floats(0.01, 2.0), st.sampled_from([1.0, 2.0, 3.0]))
def test_cover_validity_and_properness(values, eps, q):
    pf = from_table(values)
    for mode in ("exact", "greedy"):
        res = proper_cover(pf, eps, q, mode)
        assert is_valid_cover(pf, res)
        assert all(0 <= i < pf.m for i in res.member_indices)


@given(tables, st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_covering_monotone_in_eps(values, a, b):
    index = CoverIndex(from_table(values))
    lo, hi = sorted((a, b))
    assert index.count(lo).value >= index.count(hi).value
