"""Sub-root functions, fixed points, and excess-risk certificates.

The certificate assembles K/(K-1) P_n f + 704 K/B r* + t (11 (b-a) + 26 B K)/n
with t = log(1/delta), where r* is the fixed point of a sub-root function
dominating B times the local complexity of the shifted loss class.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import bisect

from radbound.chain_bounds import (
    TRACED,
    UNIT,
    BoundDomainError,
    _cmode,
    cor33_traced_at,
    cor34_traced_at,
)
from radbound.family_lab import FiniteRandom, FamilySpec, uniform_points
from radbound.regimes import EntropyRegime

DEFAULT_TOL = 1e-12
BARTLETT_FIXED_POINT = 704.0
BARTLETT_RANGE = 11.0
BARTLETT_VARIANCE = 26.0
GHOST_N = 100_000


class SubRootError(ValueError):
    """The probed function is not sub-root on the grid."""


class VarianceConditionError(ValueError):
    """Pf^2 <= B Pf fails for some member of the shifted loss class."""


# --- sub-root functions and fixed points ----------------------------------------------


@dataclass(frozen=True)
class SubRootProbe:
    evaluator: Callable[[float], float]
    r_max: float = 4.0
    grid_points: int = 64
    r_min: float = 1e-10

    def grid(self):
        return np.geomspace(self.r_min, self.r_max, self.grid_points)


@dataclass(frozen=True)
class SubRootReport:
    nonnegative: bool
    nondecreasing: bool
    ratio_nonincreasing: bool

    @property
    def passed(self):
        return self.nonnegative and self.nondecreasing and self.ratio_nonincreasing


def subroot_check(probe: SubRootProbe, rtol=1e-12) -> SubRootReport:
    grid = probe.grid()
    if len(grid) < 3:
        raise ValueError("sub-root check needs at least 3 grid points")
    vals = np.array([probe.evaluator(float(r)) for r in grid])
    if not np.all(np.isfinite(vals)):
        raise ValueError("probe evaluator is not finite on the grid")
    scale = max(float(np.abs(vals).max()), 1e-300)
    ratio = vals / np.sqrt(grid)
    return SubRootReport(
        bool(np.all(vals >= 0)),
        bool(np.all(np.diff(vals) >= -rtol * scale)),
        bool(np.all(np.diff(ratio) <= rtol * np.abs(ratio[:-1]) + 1e-300)),
    )


@dataclass(frozen=True)
class FixedPointResult:
    r_star: float
    residual: float
    iterations: int


def fixed_point(probe: SubRootProbe, tolerance=DEFAULT_TOL, check=True) -> FixedPointResult:
    """Bisection on psi(r) - r over [tolerance, psi(r_max) + r_max]."""
    psi = probe.evaluator
    if check and not subroot_check(probe).passed:
        raise SubRootError("probe is not sub-root; the positive fixed point need not be unique")
    lo = tolerance
    if psi(lo) - lo <= 0:
        return FixedPointResult(lo, abs(psi(lo) - lo), 0)
    hi = psi(probe.r_max) + probe.r_max
    while psi(hi) - hi > 0:
        hi *= 2
    counter = [0]

    def h(r):
        counter[0] += 1
        return psi(r) - r

    root = bisect(h, lo, hi, xtol=min(tolerance, 1e-300), rtol=4 * np.finfo(float).eps, maxiter=2000)
    residual = abs(psi(root) - root)
    if residual > tolerance:
        raise ArithmeticError(f"bisection residual {residual} exceeds tolerance {tolerance}")
    return FixedPointResult(float(root), float(residual), counter[0])


@dataclass(frozen=True)
class RootAffine:
    """psi(r) = a + s sqrt(r) with a, s >= 0: sub-root with a closed-form fixed point."""

    a: float
    s: float

    def __post_init__(self):
        if self.a < 0 or self.s < 0:
            raise ValueError("coefficients must be nonnegative")

    def __call__(self, r):
        return self.a + self.s * math.sqrt(r)

    def scaled(self, c):
        return RootAffine(self.a * c, self.s * c)

    def fixed_point(self):
        root = (self.s + math.sqrt(self.s * self.s + 4 * self.a)) / 2
        return root * root


def _root_affine_from(func):
    a = func(0.0)
    return RootAffine(a, func(1.0) - a)


# --- Bartlett-type assembly -----------------------------------------------------


@dataclass(frozen=True)
class CertificateParams:
    B: float
    K: float
    delta: float
    range_width: float
    lipschitz: float
    regime: EntropyRegime
    b: float

    def __post_init__(self):
        if self.K <= 1:
            raise ValueError("K must exceed 1")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.B <= 0 or self.range_width <= 0 or self.lipschitz <= 0 or self.b <= 0:
            raise ValueError("B, range_width, lipschitz and b must be positive")

    @property
    def t(self):
        return math.log(1 / self.delta)


@dataclass(frozen=True)
class GeneralizationCertificate:
    empirical_term: float
    fixed_point_term: float
    confidence_term: float
    total: float
    r_star: float
    n: float
    params: CertificateParams
    extras: dict = field(default_factory=dict, compare=False)


def bartlett_bound(empirical_mean, r_star, params: CertificateParams, n, extras=None) -> GeneralizationCertificate:
    if n < 1:
        raise ValueError("n must be >= 1")
    if params.K <= 1:
        raise ValueError("K must exceed 1")
    K, B = params.K, params.B
    emp = K / (K - 1) * empirical_mean
    fpt = BARTLETT_FIXED_POINT * K / B * r_star
    conf = params.t * (BARTLETT_RANGE * params.range_width + BARTLETT_VARIANCE * B * K) / n
    return GeneralizationCertificate(emp, fpt, conf, emp + fpt + conf, float(r_star), n, params, extras or {})


def loss_regime_transform(regime: EntropyRegime, L) -> EntropyRegime:
    """Entropy of the loss class from that of the hypotheses: eps -> H(eps / L)."""
    if not L > 0:
        raise ValueError("Lipschitz constant must be positive")
    if regime.kind == "logpoly":
        return EntropyRegime.logpoly(regime.d, regime.p, regime.gamma * L)
    if regime.kind == "poly":
        return EntropyRegime.poly(regime.gamma * L ** regime.p, regime.p)
    return EntropyRegime.polylog(regime.gamma * L ** regime.p, regime.p, regime.scale * L)


def _checked_fixed_point(psi: RootAffine, r_max):
    closed = psi.fixed_point()
    probe = SubRootProbe(psi, r_max=max(r_max, 2 * closed))
    numeric = fixed_point(probe, check=False)
    if abs(numeric.r_star - closed) > 1e-10 * max(closed, 1e-300) + 2 * DEFAULT_TOL:
        raise ArithmeticError(f"closed-form fixed point {closed} disagrees with bisection {numeric.r_star}")
    return closed, numeric


def logpoly_psi(params: CertificateParams, n, cmode=UNIT) -> RootAffine:
    """Sub-root function from the eps = n^-1/2 log-polynomial branch for the loss class."""
    cmode = _cmode(cmode)
    reg = loss_regime_transform(params.regime, params.lipschitz)
    if reg.kind != "logpoly":
        raise ValueError("log-polynomial certificate needs a logpoly regime")
    if cmode.choice == "traced":
        return _root_affine_from(lambda r: cor33_traced_at(reg, params.b, r, n, n ** -0.5)).scaled(params.B)
    lp = reg.d * math.log(2 * reg.gamma * math.sqrt(n)) ** reg.p / n
    return RootAffine(lp, math.sqrt(lp)).scaled(cmode.multiplier)


def certificate_logpoly(params: CertificateParams, n, cmode=UNIT) -> GeneralizationCertificate:
    reg = loss_regime_transform(params.regime, params.lipschitz)
    if n < max(2.0, reg.gamma ** -2):
        raise BoundDomainError(f"need n >= max(2, gamma^-2) = {max(2.0, reg.gamma ** -2)}")
    psi = logpoly_psi(params, n, cmode)
    r_star, numeric = _checked_fixed_point(psi, (2 * params.b) ** 2)
    return bartlett_bound(0.0, r_star, params, n, {
        "psi_a": psi.a, "psi_s": psi.s, "bisection_r_star": numeric.r_star, "cmode": str(_cmode(cmode)),
    })


def polylog_eps0(p, n):
    return math.log(n) ** (2 / (p + 2)) * n ** (-1 / (p + 2))


def certificate_polylog(params: CertificateParams, n, cmode=UNIT) -> GeneralizationCertificate:
    """Certificate with the p < 2 polylog sub-root function frozen at eps0."""
    cmode = _cmode(cmode)
    reg = loss_regime_transform(params.regime, params.lipschitz)
    if reg.kind != "polylog":
        raise ValueError("polylog certificate needs a polylog regime")
    p = reg.p
    if p >= 2:
        raise BoundDomainError("the polylog certificate covers 0 < p < 2")
    if n < 3:
        raise BoundDomainError("need n >= 3 so that log n > 1")
    eps0 = polylog_eps0(p, n)
    chain_term = n ** -0.5 * eps0 ** (1 - p / 2) * math.log(1 / eps0)
    entropy_term = eps0 ** -p * math.log(4 / eps0) ** 2 / n
    if cmode.choice == "traced":
        reg_traced = reg
        if reg.scale != 2.0:
            # log(scale/eps) <= (1 + log(scale/2)/log 2) log(2/eps) on (0, 1)
            ratio = (1 + max(math.log(reg.scale / 2), 0.0) / math.log(2)) ** 2
            reg_traced = EntropyRegime.polylog(reg.gamma * ratio, p, 2.0)
        psi = _root_affine_from(lambda r: cor34_traced_at(reg_traced, params.b, r, n, eps0)).scaled(params.B)
    else:
        psi = RootAffine(chain_term + entropy_term, math.sqrt(entropy_term)).scaled(cmode.multiplier)
    r_star, numeric = _checked_fixed_point(psi, (2 * params.b) ** 2)
    logs = math.log(n) ** ((2 - p) / (p + 2)) * math.log(n / math.log(n) ** (2 / (p + 2)))
    return bartlett_bound(0.0, r_star, params, n, {
        "eps0": eps0,
        "chain_summand": cmode.multiplier * chain_term,
        "entropy_summand": cmode.multiplier * entropy_term,
        "r_star_bound": cmode.multiplier * (chain_term + entropy_term),
        "bisection_r_star": numeric.r_star,
        "rate_printed": n ** (-p / (p + 2)) * logs,
        "rate_proof": n ** (-2 / (p + 2)) * logs,
        "exponent_printed": -p / (p + 2),
        "exponent_proof": -2 / (p + 2),
        "cmode": str(cmode),
    })


# --- ERM validation harness -------------------------------------------------------


@dataclass(frozen=True)
class ErmPreset:
    """Bounded regression: y = h*(x) + noise, squared loss, finite hypothesis set."""

    hypotheses: FamilySpec
    target_index: int
    noise: float
    b: float

    @property
    def lipschitz(self):
        return 4 * self.b

    @property
    def loss_cap(self):
        return 4 * self.b ** 2

    @property
    def range_width(self):
        return 8 * self.b ** 2

    @property
    def B(self):
        return 16 * self.b ** 2

    def params(self, delta=0.05, K=2.0) -> CertificateParams:
        return CertificateParams(B=self.B, K=K, delta=delta, range_width=self.range_width,
                                 lipschitz=self.lipschitz, regime=self.hypotheses.declared_regime,
                                 b=self.loss_cap)

    def draw(self, rng, n):
        x = uniform_points(rng, n, self.hypotheses.dim)
        table = self.hypotheses.evaluate(x)
        y = table[self.target_index] + rng.uniform(-self.noise, self.noise, n)
        return table, y


def finite_erm_preset(m=32, b=1.0, seed=0, noise=None) -> ErmPreset:
    """m sinusoids with cap b/2, target row 0, uniform noise on [-b/2, b/2]."""
    noise = b / 2 if noise is None else noise
    if not 0 <= noise <= b / 2:
        raise ValueError("noise level must lie in [0, b/2] to keep |y| <= b")
    return ErmPreset(FiniteRandom(m=m, b=b / 2, seed=seed), 0, float(noise), float(b))


def validate_variance_condition(preset: ErmPreset, table, y):
    """Check Pf^2 <= B Pf on the ghost sample for every shifted loss f."""
    shifted = (table - y) ** 2 - (table[preset.target_index] - y) ** 2
    pf = shifted.mean(axis=1)
    pf2 = (shifted ** 2).mean(axis=1)
    bad = np.flatnonzero(pf2 > preset.B * pf + 1e-12)
    if len(bad):
        i = int(bad[0])
        raise VarianceConditionError(f"Pf^2 <= B Pf fails for member {i}: (f={i}, Pf^2={pf2[i]}, Pf={pf[i]})")
    return pf


@dataclass(frozen=True)
class ErmTrialResult:
    trial: int
    seed: int
    empirical_excess_risk: float
    certificate_total: float

    @property
    def holds(self):
        return self.empirical_excess_risk <= self.certificate_total


@dataclass(frozen=True)
class ErmReport:
    n: int
    delta: float
    certificate: GeneralizationCertificate
    trials: tuple

    @property
    def coverage(self):
        return float(np.mean([t.holds for t in self.trials]))


def erm_experiment(preset: ErmPreset, n, trials, params: CertificateParams | None = None, seed=0,
                   cmode=TRACED, ghost_n=GHOST_N, workers=1) -> ErmReport:
    params = params or preset.params()
    ghost_rng = np.random.default_rng([seed, 0])
    ghost_table, ghost_y = preset.draw(ghost_rng, ghost_n)
    excess = validate_variance_condition(preset, ghost_table, ghost_y)
    cert = certificate_logpoly(params, n, cmode)
    trial_seeds = np.random.SeedSequence([seed, 1, n]).generate_state(trials, dtype=np.uint64)

    def one(t):
        s = int(trial_seeds[t])
        table, y = preset.draw(np.random.default_rng(s), n)
        risk = ((table - y) ** 2).mean(axis=1)
        chosen = int(np.argmin(risk))
        return ErmTrialResult(t, s, float(excess[chosen]), cert.total)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]
    return ErmReport(int(n), params.delta, cert, tuple(results))


# --- CSV ---------------------------------------------------------------------------

CERT_CSV_COLUMNS = ("n", "delta", "K", "B", "r_star", "empirical_term", "fixed_point_term", "confidence_term", "total")
EXPERIMENT_CSV_COLUMNS = ("trial", "seed", "excess_risk", "certificate", "holds")


def certificates_csv(certs) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CERT_CSV_COLUMNS)
    for c in certs:
        writer.writerow([repr(float(c.n)), repr(c.params.delta), repr(c.params.K), repr(c.params.B), repr(c.r_star),
                         repr(c.empirical_term), repr(c.fixed_point_term), repr(c.confidence_term), repr(c.total)])
    return buf.getvalue()


def experiment_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPERIMENT_CSV_COLUMNS)
    for r in results:
        writer.writerow([r.trial, r.seed, repr(r.empirical_excess_risk), repr(r.certificate_total), int(r.holds)])
    return buf.getvalue()
