import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from radbound import chain_bounds as cb
from radbound.family_lab import FiniteRandom, SamplePlan, draw_sample, from_table, project
from radbound.rademacher_mc import local_rc_empirical, local_rc_population
from radbound.regimes import EntropyRegime, constant_entropy


def test_massart():
    assert cb.massart_bound(1, 0.7, 10) == 0
    assert cb.massart_bound(5, 0.0, 10) == 0
    assert cb.massart_bound(8, 0.5, 100) == pytest.approx(math.sqrt(0.5 * 2 * math.log(8) / 100))
    assert cb.massart_bound(8, 0.5, 100) == pytest.approx(0.144203, abs=1e-6)


def test_chain_plan_validation():
    with pytest.raises(ValueError):
        cb.ChainPlan(0.0, 2)
    with pytest.raises(ValueError):
        cb.ChainPlan(1.0, 2, "explicit", (1.0, 0.5, 0.6))
    assert cb.ChainPlan(1.0, 3).radii() == [1.0, 0.5, 0.25, 0.125]


def test_entropy_integral_examples():
    pf = from_table([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    eps0 = float(np.sqrt(pf.second_moments().max()))
    assert cb.entropy_integral_bound(pf, cb.ChainPlan(eps0, 0), 2) == eps0
    # every level below the smallest pairwise distance: entropy log m throughout
    plan = cb.ChainPlan(eps0, 3, "explicit", (eps0, 0.01, 0.005, 0.0025))
    expected = 4 * math.sqrt(math.log(3) / 2) * (eps0 + 0.01 + 0.005) + 0.0025
    assert cb.entropy_integral_bound(pf, plan, 2, mode="exact") == pytest.approx(expected, rel=1e-12)
    expected = 4 * (1 * math.sqrt(2 / 100) + 0.5 * math.sqrt(4 / 100) + 0.25 * math.sqrt(8 / 100)) + 0.125
    assert cb.entropy_integral_bound(EntropyRegime.poly(1, 1), cb.ChainPlan(1.0, 3), 100) == pytest.approx(expected)


def test_entropy_integral_errors():
    pf = from_table([[1.0, 1.0]])
    with pytest.raises(cb.BoundDomainError):
        cb.entropy_integral_bound(pf, cb.ChainPlan(0.5, 1), 2)
    with pytest.raises(cb.EntropyDomainError):
        cb.entropy_integral_bound(EntropyRegime.logpoly(1, 1, 1), cb.ChainPlan(4.0, 1), 10)


def test_lemma31_examples():
    grid = list(np.geomspace(0.01, 2, 8))
    assert cb.lemma31_bound(from_table([[0.3, -0.1]]), 0.5, grid).value == 0
    pf = from_table(np.random.default_rng(0).uniform(-1, 1, (4, 6)))
    from radbound.family_lab import minus_family
    mf = minus_family(pf)
    expected = min(local_rc_empirical(mf, e * e).mean for e in grid)
    assert cb.lemma31_bound(pf, 0.0, grid).value == pytest.approx(expected)
    with pytest.raises(ValueError):
        cb.lemma31_bound(pf, 0.1, [])
    pf6 = from_table(np.random.default_rng(1).uniform(-1, 1, (6, 8)))
    for r in (0.05, 0.2, 0.5):
        assert local_rc_empirical(pf6, r).mean <= cb.lemma31_bound(pf6, r, list(np.geomspace(0.05, 3, 8))).value


def _oracle_theorem32_logpoly(eps, r, b, n):
    def entropy(x):
        return math.log(1 / x)

    radii = [eps / 2 ** k for k in range(61)]
    best, acc = radii[0], 0.0
    for k in range(1, 61):
        acc += 4 * radii[k - 1] * math.sqrt(2 * entropy(radii[k] / 4) / n)
        best = min(best, acc + radii[k])
    h = entropy(eps / 2)
    return 2 * best + 8 * b * h / n + math.sqrt(2 * r * h / n)


def test_theorem32_examples():
    zero = cb.theorem32_bound(constant_entropy(0.0, cap=10.0), 0.3, 1.0, 50)
    assert zero.value == pytest.approx(0.0, abs=1e-12)
    grid = [0.05, 0.3, 1.2]
    res = cb.theorem32_bound(EntropyRegime.logpoly(1, 1, 1), 0.0, 1.0, 100, eps_grid=grid)
    oracle = [_oracle_theorem32_logpoly(e, 0.0, 1.0, 100) for e in grid]
    assert res.value == pytest.approx(min(oracle), rel=1e-12)
    assert res.argmin == grid[int(np.argmin(oracle))]


def test_theorem32_skips_and_errors():
    res = cb.theorem32_bound(EntropyRegime.logpoly(1, 1, 1), 0.1, 1.0, 100, eps_grid=[0.5, 3.0])
    assert res.argmin == 0.5 and 3.0 not in res.terms
    with pytest.raises(cb.BoundDomainError):
        cb.theorem32_bound(EntropyRegime.logpoly(1, 1, 1), 0.1, 1.0, 100, eps_grid=[3.0, 4.0])
    with pytest.raises(ValueError):
        cb.theorem32_bound(EntropyRegime.logpoly(1, 1, 1), 0.1, 0.0, 100)


def test_theorem32_empirical_dominates_population_estimate():
    spec = FiniteRandom(m=6, b=1.0, seed=2)
    n = 8
    draws = [project(spec, draw_sample(SamplePlan(n, 1, s))) for s in range(20)]
    for r in (0.05, 0.2, 0.5):
        bound = cb.theorem32_bound(draws, r, spec.sup_bound, mode="empirical").value
        est = local_rc_population(spec, r, n, outer_draws=200, sign_draws=500, seed=3)
        assert est.mean - 3 * est.stderr <= bound


def test_cor33_examples():
    reg = EntropyRegime.logpoly(1, 1, 1)
    l2 = math.log(2)
    assert cb.cor33_bound(reg, 1, 1.0, 100) == pytest.approx(math.sqrt(l2 / 100) + l2 / 100)
    assert cb.cor33_bound(reg, 1, 1.0, 100) == pytest.approx(0.09018, abs=1e-5)
    assert cb.cor33_bound(reg, 1, 0.01, 100, branch=2) == pytest.approx(0.047265, abs=1e-6)
    limit = math.log(2 * math.sqrt(100)) / 100
    vals = [cb.cor33_bound(reg, 1, r, 100, branch=2) for r in (1e-2, 1e-4, 1e-8, 0.0)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] == pytest.approx(limit)
    with pytest.raises(cb.BoundDomainError):
        cb.cor33_bound(reg, 1, 1.5, 100)
    with pytest.raises(cb.BoundDomainError):
        cb.cor33_bound(EntropyRegime.logpoly(1, 1, 0.1), 1, 0.001, 10)
    with pytest.raises(cb.BoundDomainError):
        cb.cor33_bound(reg, 1, 0.0, 100, branch=1)
    assert cb.cor33_bound(reg, 1, 0.01, 100, cb.ConstantMode.user(3.0)) == pytest.approx(
        3 * cb.cor33_bound(reg, 1, 0.01, 100))


def test_logpoly_series_constant():
    assert cb.logpoly_series_constant(2) == pytest.approx(3 * math.log(2), rel=1e-12)
    direct = sum(2.0 ** -k * ((k + 1) * math.log(2)) ** 0.5 for k in range(1, 200))
    assert cb.logpoly_series_constant(1) == pytest.approx(direct)


def test_cor34_examples():
    assert cb.cor34_bound(EntropyRegime.polylog(1, 2), 1, 0.0, 1000) == pytest.approx(
        1000 ** -0.5 * math.log(1000) ** 2)
    assert cb.cor34_bound(EntropyRegime.polylog(1, 3), 1, 0.0, 1000) == pytest.approx(0.69078, abs=1e-5)
    grid = list(np.geomspace(1e-4, 0.5, 33))
    n, r = 1e4, 1e-4
    value, argmin = cb.cor34_bound(EntropyRegime.polylog(1, 1), 1, r, n, eps_grid=grid, return_argmin=True)
    e = argmin
    oracle = n ** -0.5 * e ** 0.5 * math.log(1 / e) + math.log(4 / e) ** 2 / (e * n) + math.sqrt(
        r * math.log(4 / e) ** 2 / (e * n))
    assert value == pytest.approx(oracle, rel=1e-12)
    with pytest.raises(ValueError):
        cb.cor34_bound(EntropyRegime.logpoly(1, 1, 1), 1, 0.1, 100)


def test_cor35_examples():
    assert cb.cor35_bound(EntropyRegime.poly(1, 3), 1, 0.0, 1000) == pytest.approx(0.1)
    assert cb.cor35_bound(EntropyRegime.poly(1, 2), 1, 0.01, 1e4) == pytest.approx(0.093103, abs=1e-6)
    n = 1e4
    grid = list(np.geomspace(1e-4, 1, 401))
    for r in (0.01, 0.1, 0.5):
        assert r > n ** (-2 / 3)
        _, argmin = cb.cor35_bound(EntropyRegime.poly(1, 1), 1, r, n, eps_grid=grid, return_argmin=True)
        # the eps^-p / n term pulls the minimizer above sqrt(r) by a bounded factor
        assert 1.0 <= argmin / math.sqrt(r) <= 2.0
        # without it, the first and last terms balance exactly at sqrt(r)
        trimmed = [n ** -0.5 * e ** 0.5 + math.sqrt(r / (e * n)) for e in grid]
        assert grid[int(np.argmin(trimmed))] == pytest.approx(math.sqrt(r), rel=0.03)


def test_mendelson_examples():
    assert cb.mendelson_logpoly(1, 1, 1, 1, math.exp(-2), 100) == pytest.approx(math.sqrt(math.exp(-2) / 100))
    assert cb.mendelson_logpoly(1, 1, 1, 1, math.exp(-2), 100) == pytest.approx(0.03679, abs=1e-5)
    with pytest.raises(cb.BoundDomainError):
        cb.mendelson_logpoly(1, 1, 1, 1, 1.0, 100)
    vals = [cb.mendelson_logpoly(1, 1, 1, 1, 10.0 ** -k, 100) for k in range(2, 13, 2)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    r = 0.5
    lg = math.log(1 / math.sqrt(r))
    assert cb.mendelson_logpoly(4, 1, 1, 1, r, 100) == pytest.approx(max(4 * lg / 100, 2 * math.sqrt(r / 100 * lg)))
    assert cb.mendelson_poly(1, 1, 1.0, 64) == pytest.approx(0.1875)
    assert cb.mendelson_polylog(1, 1, 2.0, 64) == pytest.approx(0.0)
    vals = [cb.mendelson_polylog(1, 1, 10.0 ** -k, 100) for k in range(2, 13, 2)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(cb.BoundDomainError):
        cb.mendelson_poly(2, 1, 0.1, 100)
    with pytest.raises(ValueError):
        cb.mendelson_poly(1, 1, 0.1, 100, cb.TRACED)


def test_compare_remark35_examples():
    for p, n in ((1.0, 1e4), (1.5, 1e6), (0.5, 100.0)):
        boundary = n ** (-2 / (p + 2))
        rep = cb.compare_remark35(p, n, [boundary])
        row = rep.rows[0]
        assert row.lhs == pytest.approx(row.rhs, rel=1e-12) and rep.holds
    rep = cb.compare_remark35(1.0, 1e4, [1e-4])
    row = rep.rows[0]
    assert row.branch == "small"
    assert row.lhs == pytest.approx(1e-2 * 1e4 ** (-1 / 3)) and row.rhs == pytest.approx(1e-2 * 1e-4 ** 0.25)
    rep = cb.compare_remark35(1.5, 1e6, [0.1])
    row = rep.rows[0]
    assert row.branch == "large" and row.lhs == pytest.approx(0.1 ** -0.75 / 1e6) and rep.holds


def test_curve_diagnostics_examples():
    grid = np.geomspace(1e-8, 1, 25)
    reg = EntropyRegime.logpoly(1, 1, 1)
    d = cb.curve_diagnostics(cb.make_curve(lambda r: cb.cor33_bound(reg, 1, r, 100, branch=2), grid))
    assert d.monotone_nondecreasing and d.subroot and d.r_to_zero_limit_kind == "bounded"
    grid = np.geomspace(1e-12, 0.5, 25)
    d = cb.curve_diagnostics(cb.make_curve(lambda r: cb.mendelson_logpoly(1, 1, 1, 1, r, 100), grid))
    assert d.r_to_zero_limit_kind == "increasing" and not d.monotone_nondecreasing
    d = cb.curve_diagnostics(cb.make_curve(lambda r: 0.3, grid))
    assert d.monotone_nondecreasing and d.subroot
    with pytest.raises(ValueError):
        cb.curve_diagnostics(cb.make_curve(lambda r: r, [0.1, 0.2]))


def test_curve_validation_and_csv():
    with pytest.raises(ValueError):
        cb.BoundCurve(((0.2, 1.0), (0.1, 1.0)))
    curve = cb.make_curve(lambda r: 2 * r, [0.5, 0.25], name="lin")
    text = cb.curves_csv([curve])
    assert text.splitlines()[0] == "bound_name,params_hash,r,value"
    assert text.splitlines()[1].endswith(",0.25,0.5")
    assert cb.comparison_csv([0.1], [1.0], [2.0]).splitlines() == ["r,ours,baseline,ratio", "0.1,1.0,2.0,0.5"]


def test_bound_registry():
    func, q = cb.bound_function("cor35", p=2.0, n=1e4)
    assert func(0.01) == pytest.approx(0.093103, abs=1e-6) and q["gamma"] == 1.0
    with pytest.raises(ValueError):
        cb.bound_function("nope")


@given(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(1.0, 3.0), st.floats(1e-6, 1.0), st.floats(2, 6))
def test_traced_cor33_dominates_theorem32(d, p, gamma, rfrac, logn):
    n = 10 ** logn
    reg = EntropyRegime.logpoly(d, p, gamma)
    r = rfrac * gamma ** 2
    th = cb.theorem32_bound(reg, r, 1.0, n, eps_grid=[math.sqrt(r), n ** -0.5]).value
    assert cb.cor33_bound(reg, 1.0, r, n, cb.TRACED) >= th * (1 - 1e-12)


@given(st.floats(0.1, 4), st.floats(0.2, 3.5), st.floats(1e-8, 1.0), st.floats(2, 6))
def test_traced_cor34_cor35_dominate_theorem32(gamma, p, r, logn):
    n = 10 ** logn
    assume(abs(p - 2) > 1e-9)
    for kind, cor in (("polylog", cb.cor34_bound), ("poly", cb.cor35_bound)):
        reg = EntropyRegime.polylog(gamma, p) if kind == "polylog" else EntropyRegime.poly(gamma, p)
        value, argmin = cor(reg, 1.0, r, n, cb.TRACED, return_argmin=True)
        th = cb.theorem32_bound(reg, r, 1.0, n, eps_grid=[argmin]).value
        assert value >= th * (1 - 1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_traced_boundary_cases_dominate_theorem32(p):
    for n in (1e2, 1e4, 1e6):
        for r in (0.0, 1e-4, 0.5):
            for reg, cor in ((EntropyRegime.polylog(1, p), cb.cor34_bound), (EntropyRegime.poly(1, p), cb.cor35_bound)):
                th = cb.theorem32_bound(reg, r, 1.0, n, eps_grid=[1.0]).value
                assert cor(reg, 1.0, r, n, cb.TRACED) >= th


@pytest.mark.parametrize("name,params", [("cor33", dict(branch=2)), ("cor34", dict(p=2.0)), ("cor34", dict(p=3.0)),
                                         ("cor35", dict(p=2.0)), ("cor35", dict(p=3.0))])
@pytest.mark.parametrize("cmode", ["unit", "traced"])
def test_subroot_curves(name, params, cmode):
    func, _ = cb.bound_function(name, cmode=cmode, n=500.0, **params)
    d = cb.curve_diagnostics(cb.make_curve(func, np.geomspace(1e-8, 1, 30)))
    assert d.subroot and d.monotone_nondecreasing
