"""Desk-scale invariant suite run by ``radbound selftest``.

Each check draws its cases from ``default_rng([seed, check, case])`` so the
outcome does not depend on the worker count.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from radbound import certify, chain_bounds as cb, covermetrics as cm, rademacher_mc as rmc
from radbound.family_lab import ConstantFamily, FiniteRandom, LinearBall, LipschitzBall, from_table
from radbound.regimes import EntropyRegime


def preset_families():
    return {
        "finite_random": FiniteRandom(m=16, b=1.0, seed=7),
        "linear_ball": LinearBall(d=2, radius=1.0, count=5, b=1.0),
        "lipschitz_ball": LipschitzBall(lipschitz=1.0, b=1.0, resolution=4),
        "constant": ConstantFamily((0.0,)),
    }


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    violations: int
    worst_margin: float

    @property
    def passed(self):
        return self.violations == 0


def random_table(rng, m, n, b=1.0):
    """Uniform entries, sometimes snapped to {-b, 0, b} to create ties and duplicates."""
    values = rng.uniform(-b, b, size=(m, n))
    if rng.random() < 0.3:
        values = np.round(values / b) * b
    return values


def _radii(rng, moments, k):
    qs = np.sort(rng.uniform(0, 1, k))
    return [float(np.quantile(moments, q)) for q in qs]


def _run(cases, func, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(func, range(cases)))
    return [func(i) for i in range(cases)]


def _collect(name, margins):
    margins = [m for group in margins for m in (group if isinstance(group, list) else [group])]
    return CheckResult(name, len(margins), sum(1 for m in margins if m < 0), float(min(margins)))


def check_massart(seed, cases=30, workers=1):
    def one(i):
        rng = np.random.default_rng([seed, 1, i])
        m, n = int(rng.integers(1, 65)), int(rng.integers(1, 11))
        pf = from_table(random_table(rng, m, n))
        out = []
        for r in _radii(rng, pf.second_moments(), 5):
            lhs = rmc.local_rc_empirical(pf, r).mean
            out.append(cb.massart_bound(pf.m, r, n) - lhs + 1e-12)
        return out
    return _collect("massart", _run(cases, one, workers))


def check_lemma31(seed, cases=15, workers=1):
    def one(i):
        rng = np.random.default_rng([seed, 2, i])
        m, n = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        pf = from_table(random_table(rng, m, n))
        grid = list(np.geomspace(1e-3, 4.0, 8))
        out = []
        for r in _radii(rng, pf.second_moments(), 3):
            lhs = rmc.local_rc_empirical(pf, r).mean
            out.append(cb.lemma31_bound(pf, r, grid).value - lhs + 1e-12)
        return out
    return _collect("lemma31", _run(cases, one, workers))


def check_theorem32(seed, ns=(8,), outer=40, signs=200, workers=1):
    margins = []
    for k, (name, spec) in enumerate(sorted(preset_families().items())):
        for n in ns:
            grid = np.geomspace(1e-3, 1.0, 4)
            est = rmc.local_rc_population_curve(spec, grid, n, outer_draws=outer, sign_draws=signs,
                                                seed=seed + k, workers=workers)
            for r, e in zip(grid, est):
                bound = cb.theorem32_bound(spec.declared_regime, r, spec.sup_bound, n).value
                margins.append(bound - (e.mean - 3 * e.stderr))
    return _collect("theorem32", margins)


def check_structural(seed, cases=40, workers=1):
    def one(i):
        rng = np.random.default_rng([seed, 4, i])
        pf = from_table(random_table(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7))))
        eps = float(rng.uniform(0.05, 1.5))
        subset = rng.choice(pf.m, size=int(rng.integers(1, pf.m + 1)), replace=False)
        a = cm.verify_minus_lemma(pf, eps)
        c = cm.verify_subfamily_lemma(pf, subset, eps)
        xs = np.sort(rng.uniform(-1.5, 1.5, 4))
        phi = rmc.PiecewiseLinear(tuple(xs), tuple(rng.uniform(-1, 1, 4)))
        d = rmc.contraction_check(pf, phi)
        return [float(a.rhs - a.lhs), float(c.rhs - c.lhs), d.rhs - d.lhs + 1e-12]
    return _collect("structural", _run(cases, one, workers))


def check_entropy_integral(seed, cases=15, workers=1):
    def one(i):
        rng = np.random.default_rng([seed, 5, i])
        pf = from_table(random_table(rng, int(rng.integers(1, 13)), int(rng.integers(1, 9))))
        lhs = rmc.local_rc_empirical(pf, np.inf).mean
        eps0 = float(np.sqrt(pf.second_moments().max())) or 1e-9
        return [cb.entropy_integral_bound(pf, cb.ChainPlan(eps0, N), pf.n, mode="exact") - lhs + 1e-12
                for N in range(7)]
    return _collect("entropy_integral", _run(cases, one, workers))


def check_remarks(seed):
    margins = []
    r_grid = np.geomspace(1e-8, 1.0, 25)
    curves = [("cor33", dict(branch=2)), ("cor34", dict(p=2.0)), ("cor34", dict(p=3.0)),
              ("cor35", dict(p=2.0)), ("cor35", dict(p=3.0))]
    for name, params in curves:
        func, _ = cb.bound_function(name, n=100.0, **params)
        diag = cb.curve_diagnostics(cb.make_curve(func, r_grid, name=name))
        margins.append(1.0 if diag.subroot and diag.monotone_nondecreasing else -1.0)
    along = [10.0 ** -k for k in range(2, 13, 2)]
    for func in (lambda r: cb.mendelson_logpoly(1, 1, 1, 1, r, 100), lambda r: cb.mendelson_polylog(1, 1, r, 100)):
        vals = [func(r) for r in along]
        margins.append(min(b - a for a, b in zip(vals, vals[1:])))
    for p in (0.5, 1.0, 1.5):
        for n in (1e2, 1e4, 1e6):
            boundary = n ** (-2 / (p + 2))
            rep = cb.compare_remark35(p, n, list(np.geomspace(1e-9, 1.0, 9)) + [boundary])
            margins.append(1.0 if rep.holds else -1.0)
            row = rep.rows[-1]
            margins.append(1e-12 - abs(row.lhs - row.rhs) / row.rhs)
    return _collect("remarks", margins)


def check_fixed_point(seed, cases=20):
    margins = []
    res = certify.fixed_point(certify.SubRootProbe(lambda r: 0.01 + math.sqrt(0.04 * r)))
    exact = (0.2 + math.sqrt(0.08)) ** 2 / 4
    margins.append(1e-10 - abs(res.r_star - exact) / exact)
    for i in range(cases):
        rng = np.random.default_rng([seed, 7, i])
        a1, s1 = rng.uniform(0, 0.1), rng.uniform(0, 0.5)
        a2, s2 = a1 + rng.uniform(0, 0.1), s1 + rng.uniform(0, 0.5)
        r1 = certify.fixed_point(certify.SubRootProbe(certify.RootAffine(a1, s1))).r_star
        r2 = certify.fixed_point(certify.SubRootProbe(certify.RootAffine(a2, s2))).r_star
        margins.append(r2 - r1 + 1e-12)
    return _collect("fixed_point", margins)


def rate_fit(p, gamma=0.5, lipschitz=1.0):
    """(slope after removing p log log n, fitted log exponent) over n = 2^8..2^20."""
    ns = 2.0 ** np.arange(8, 21)
    params = certify.CertificateParams(B=1.0, K=2.0, delta=0.05, range_width=1.0, lipschitz=lipschitz,
                                       regime=EntropyRegime.logpoly(1.0, p, gamma), b=1.0)
    fpt = np.array([certify.certificate_logpoly(params, n).fixed_point_term for n in ns])
    x, ll = np.log(ns), np.log(np.log(ns))
    slope = np.polyfit(x, np.log(fpt) - p * ll, 1)[0]
    exponent = np.polyfit(ll, np.log(fpt) + x, 1)[0]
    return float(slope), float(exponent)


def check_rate(seed):
    margins = []
    for p in (1.0, 2.0):
        slope, exponent = rate_fit(p)
        margins += [0.05 - abs(slope + 1), 0.1 * p - abs(exponent - p)]
    return _collect("rate", margins)


def check_erm(seed, ns=(64,), trials=50, ghost_n=20_000, workers=1):
    preset = certify.finite_erm_preset(m=32, b=1.0, seed=seed % 2**32)
    margins = []
    for n in ns:
        rep = certify.erm_experiment(preset, n, trials, seed=seed, ghost_n=ghost_n, workers=workers)
        margins.append(rep.coverage - (1 - rep.delta))
    return _collect("erm_coverage", margins)


def run_selftest(seed=0, workers=1, level="quick"):
    full = level == "full"
    return [
        check_massart(seed, 100 if full else 30, workers),
        check_lemma31(seed, 50 if full else 15, workers),
        check_theorem32(seed, (8, 16) if full else (8,), 200 if full else 40, 2000 if full else 200, workers),
        check_structural(seed, 200 if full else 40, workers),
        check_entropy_integral(seed, 50 if full else 15, workers),
        check_remarks(seed),
        check_fixed_point(seed, 50 if full else 20),
        check_rate(seed),
        check_erm(seed, (64, 256, 1024) if full else (64,), 200 if full else 50, 100_000 if full else 20_000,
                  workers),
    ]


def selftest_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("check", "cases", "violations", "worst_margin", "passed"))
    for res in results:
        writer.writerow([res.name, res.cases, res.violations, repr(res.worst_margin), int(res.passed)])
    return buf.getvalue()
