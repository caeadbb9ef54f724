"""Closed-form and semi-empirical bounds on local Rademacher complexities.

Constant handling: ``ConstantMode`` picks between the bare printed rates
(unit), the explicit constants carried through the chaining arguments
(traced), or a user multiplier.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from radbound.covermetrics import LEMMA_EXACT_MAX_ROWS, CoverIndex
from radbound.family_lab import ProjectedFamily, minus_family
from radbound.rademacher_mc import EXACT_MAX_N, local_rc_empirical
from radbound.regimes import (
    EntropyDomainError,
    EntropyEvaluator,
    EntropyRegime,
    as_evaluator,
    minus_entropy,
    subfamily_entropy,
)

MAX_CHAIN_LEVELS = 60
DEFAULT_GRID_POINTS = 33
REL_TOL = 1e-12


class BoundDomainError(ValueError):
    """Bound evaluated outside the domain of its formula or hypotheses."""


@dataclass(frozen=True)
class ConstantMode:
    choice: str = "unit"
    value: float = 1.0

    def __post_init__(self):
        if self.choice not in ("unit", "traced", "user"):
            raise ValueError(f"unknown constant mode {self.choice!r}")
        if not self.value > 0:
            raise ValueError("constant must be positive")

    @classmethod
    def user(cls, value):
        return cls("user", float(value))

    @classmethod
    def parse(cls, text):
        text = str(text).strip()
        if text in ("unit", "traced"):
            return cls(text)
        if text.startswith("user:"):
            return cls.user(float(text[5:]))
        raise ValueError(f"constant mode must be unit, traced or user:<value>, got {text!r}")

    @property
    def multiplier(self):
        return self.value if self.choice == "user" else 1.0

    def __str__(self):
        return f"user:{self.value!r}" if self.choice == "user" else self.choice


UNIT = ConstantMode("unit")
TRACED = ConstantMode("traced")


def _cmode(cmode):
    if cmode is None:
        return UNIT
    return cmode if isinstance(cmode, ConstantMode) else ConstantMode.parse(cmode)


# --- chaining -----------------------------------------------------------------


@dataclass(frozen=True)
class ChainPlan:
    """Decreasing radii eps_0 > eps_1 > ... > eps_N."""

    eps0: float
    levels: int
    rule: str = "dyadic"
    sequence: tuple | None = None

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if self.levels < 0:
            raise ValueError("levels must be nonnegative")
        if self.rule == "explicit":
            seq = self.sequence or ()
            if len(seq) < self.levels + 1 or seq[0] != self.eps0:
                raise ValueError("explicit sequence must start at eps0 and cover all levels")
            if any(b >= a for a, b in zip(seq, seq[1:self.levels + 1])) or seq[self.levels] <= 0:
                raise ValueError("explicit sequence must be strictly decreasing and positive")
        elif self.rule != "dyadic":
            raise ValueError(f"unknown chaining rule {self.rule!r}")

    def radii(self):
        if self.rule == "dyadic":
            return [self.eps0 * 2.0 ** -k for k in range(self.levels + 1)]
        return [float(e) for e in self.sequence[: self.levels + 1]]


def chain_value(radii, entropies, n):
    """4 sum_{k=1..N} eps_{k-1} sqrt(H_k / n) + eps_N for radii eps_0..eps_N."""
    total = radii[-1]
    for k in range(1, len(radii)):
        total += 4 * radii[k - 1] * math.sqrt(max(entropies[k - 1], 0.0) / n)
    return total


def best_chain(radii, entropies, n):
    """Minimum of ``chain_value`` over all truncation levels N."""
    best = radii[0]
    partial = 0.0
    for k in range(1, len(radii)):
        partial += 4 * radii[k - 1] * math.sqrt(max(entropies[k - 1], 0.0) / n)
        best = min(best, partial + radii[k])
    return best


def entropy_integral_bound(source, plan: ChainPlan, n, mode="auto", q=2.0):
    """Refined entropy integral for the class ``source``.

    ``source`` is a ProjectedFamily (covering numbers from proper covers of
    its rows) or an entropy model (EntropyRegime / EntropyEvaluator).
    """
    radii = plan.radii()
    if isinstance(source, (ProjectedFamily, np.ndarray)):
        index = source if isinstance(source, CoverIndex) else CoverIndex(source, q)
        norms = np.sqrt(np.mean(index.values ** 2, axis=1))
        if plan.eps0 < norms.max() * (1 - REL_TOL):
            raise BoundDomainError(f"eps0={plan.eps0} below the largest row norm {norms.max()}")
        entropies = [math.log(index.count(e, mode, exact_limit=LEMMA_EXACT_MAX_ROWS).value) for e in radii[1:]]
    elif isinstance(source, CoverIndex):
        entropies = [math.log(source.count(e, mode, exact_limit=LEMMA_EXACT_MAX_ROWS).value) for e in radii[1:]]
    else:
        evaluator = as_evaluator(source)
        entropies = [evaluator(e) for e in radii[1:]]
    return chain_value(radii, entropies, n)


def massart_bound(N, r, n):
    """sqrt(2 r log N / n)."""
    if N < 1 or r < 0 or n < 1:
        raise ValueError("massart bound needs N >= 1, r >= 0, n >= 1")
    return math.sqrt(2 * r * math.log(N) / n)


# --- empirical bounds -----------------------------------------------------------


@dataclass(frozen=True)
class GridMinimum:
    value: float
    argmin: float
    terms: dict = field(default_factory=dict, compare=False)


def lemma31_bound(pf: ProjectedFamily, r, eps_grid, seed=0, draws=2000, cover_mode="auto"):
    """min over eps of E_sigma R_n{g in F-F : P_n g^2 <= eps^2} + sqrt(2 r log N(eps/2, F) / n)."""
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise ValueError("empty eps grid")
    n = pf.n
    mode = "exact" if n <= EXACT_MAX_N else "monte-carlo"
    minus = minus_family(pf)
    index = CoverIndex(pf)
    best = None
    terms = {}
    for eps in eps_grid:
        inner = local_rc_empirical(minus, eps * eps, mode, draws, seed).mean
        count = index.count(eps / 2, cover_mode, exact_limit=LEMMA_EXACT_MAX_ROWS).value
        value = inner + math.sqrt(2 * r * math.log(count) / n)
        terms[eps] = (inner, count)
        if best is None or value < best[0]:
            best = (value, eps)
    return GridMinimum(best[0], best[1], terms)


def default_eps_grid(lo, hi, k=DEFAULT_GRID_POINTS):
    return list(np.geomspace(lo, hi, k))


def _analytic_ball(ball_entropy, eps, n):
    radii = [eps * 2.0 ** -k for k in range(MAX_CHAIN_LEVELS + 1)]
    return best_chain(radii, [ball_entropy(e) for e in radii[1:]], n)


class _EmpiricalSource:
    """Per-sample cover indices for the family and its difference class."""

    def __init__(self, families, cover_mode):
        self.families = list(families)
        self.cover_mode = cover_mode
        self.index = [CoverIndex(pf) for pf in self.families]
        minus = [minus_family(pf) for pf in self.families]
        self.minus_index = [CoverIndex(m) for m in minus]
        self.minus_norm2 = [np.mean(m.values ** 2, axis=1) for m in minus]
        self.n = self.families[0].n

    def entropy(self, eps):
        return max(math.log(ix.count(eps, self.cover_mode).value) for ix in self.index)

    def ball_term(self, eps, levels):
        vals = []
        for ix, norm2 in zip(self.minus_index, self.minus_norm2):
            rows = np.flatnonzero(norm2 <= eps * eps * (1 + REL_TOL))
            radii = [eps * 2.0 ** -k for k in range(levels + 1)]
            ent = [math.log(ix.count(e, self.cover_mode, rows=rows).value) for e in radii[1:]]
            vals.append(best_chain(radii, ent, self.n))
        return float(np.mean(vals))


def theorem32_bound(source, r, b, n=None, eps_grid=None, mode="analytic", levels=10, cover_mode="auto",
                    precomputed=None) -> GridMinimum:
    """min over eps of 2 E R_n{g in F-F : P_n g^2 <= eps^2} + 8 b H(eps/2)/n + sqrt(2 r H(eps/2)/n).

    analytic: ``source`` is an entropy model H; the difference-class ball is
    chained with entropy 2 H(eps_k / 4).  empirical: ``source`` is one or
    more ProjectedFamily draws; H is the largest observed log covering
    number and the ball term is the average chaining bound over draws.
    """
    if not b > 0:
        raise ValueError("b must be positive")
    if mode == "analytic":
        H = as_evaluator(source)
        ball_entropy = subfamily_entropy(minus_entropy(H))
        if eps_grid is None:
            hi = 2 * H.cap if math.isfinite(H.cap) else 4 * b
            eps_grid = default_eps_grid(1e-4, hi)

        def terms_at(eps):
            h = H(eps / 2)
            return _analytic_ball(ball_entropy, eps, n), h
    elif mode == "empirical":
        src = precomputed or _EmpiricalSource([source] if isinstance(source, ProjectedFamily) else source,
                                              cover_mode)
        n = src.n
        if eps_grid is None:
            eps_grid = default_eps_grid(1e-3 * b, 4 * b, 17)

        def terms_at(eps):
            return src.ball_term(eps, levels), src.entropy(eps / 2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best = None
    terms = {}
    for eps in eps_grid:
        try:
            ball, h = terms_at(float(eps))
        except EntropyDomainError:
            continue
        value = 2 * ball + 8 * b * h / n + math.sqrt(2 * r * h / n)
        terms[float(eps)] = (ball, h)
        if best is None or value < best[0]:
            best = (value, float(eps))
    if best is None:
        raise BoundDomainError("every grid point lies outside the entropy validity domain")
    return GridMinimum(best[0], best[1], terms)


# --- explicit corollaries ----------------------------------------------------------


def logpoly_series_constant(p, terms=400):
    """sum_{k>=1} 2^-k ((k+1) log 2)^(p/2)."""
    return math.fsum(2.0 ** -k * ((k + 1) * math.log(2)) ** (p / 2) for k in range(1, terms))


def _require(regime, kind):
    if not isinstance(regime, EntropyRegime) or regime.kind != kind:
        raise ValueError(f"expected a {kind} entropy regime, got {regime!r}")


def cor33_traced_at(regime, b, r, n, eps):
    """Explicit-constant bound before absorbing constants, at one eps in (0, 2 gamma]."""
    d, p, g = regime.d, regime.p, regime.gamma
    if not 0 < eps <= 2 * g * (1 + REL_TOL):
        raise BoundDomainError("eps must lie in (0, 2 gamma]")
    lg = max(math.log(2 * g / eps), 0.0)
    chain = 2 ** ((9 + p) / 2) * math.sqrt(d / n) * eps * (logpoly_series_constant(p) + lg ** (p / 2))
    return chain + 8 * b * d * lg ** p / n + math.sqrt(2 * r * d * lg ** p / n)


def cor33_bound(regime: EntropyRegime, b, r, n, cmode=UNIT, branch=None):
    """Log-polynomial entropy: min of the eps = sqrt(r) and eps = n^-1/2 branches.

    ``branch`` 1 or 2 selects a single branch.  Needs 0 < r <= gamma^2
    and n >= gamma^-2; r = 0 is accepted for branch 2 only.
    """
    _require(regime, "logpoly")
    cmode = _cmode(cmode)
    d, p, g = regime.d, regime.p, regime.gamma
    if r < 0 or r > g * g * (1 + REL_TOL):
        raise BoundDomainError(f"need 0 < r <= gamma^2 = {g * g}, got r={r}")
    if n < g ** -2:
        raise BoundDomainError(f"need n >= gamma^-2 = {g ** -2}")
    branches = (1, 2) if branch is None else (branch,)
    if r == 0:
        if branch == 1:
            raise BoundDomainError("the eps = sqrt(r) branch needs r > 0")
        branches = (2,)
    values = []
    for br in branches:
        if cmode.choice == "traced":
            eps = math.sqrt(r) if br == 1 else n ** -0.5
            values.append(cor33_traced_at(regime, b, r, n, eps))
        else:
            lg = math.log(2 * g / math.sqrt(r)) if br == 1 else math.log(2 * g * math.sqrt(n))
            lp = lg ** p
            values.append(cmode.multiplier * (math.sqrt(d * r * lp / n) + d * lp / n))
    return min(values)


def _geometric_sums(p):
    """S0 = sum q^k and S1 = sum (k+3) q^k over k >= 1 with q = 2^((p-2)/2) < 1."""
    qv = 2.0 ** ((p - 2) / 2)
    s0 = qv / (1 - qv)
    s1 = qv / (1 - qv) ** 2 + 3 * s0
    return s0, s1


def _grid_min(func, grid):
    best = None
    for eps in grid:
        try:
            v = func(float(eps))
        except BoundDomainError:
            continue
        if best is None or v < best[0]:
            best = (v, float(eps))
    if best is None:
        raise BoundDomainError("no admissible point on the eps grid")
    return best


def _dyadic_depth(n, divisor):
    return max(1, math.ceil(math.log2(n) / divisor))


def cor34_traced_at(regime, b, r, n, eps, levels=None):
    """Explicit-constant polylog bound at eps; levels=None sums the full series (p < 2 only)."""
    g, p = regime.gamma, regime.p
    h_half = g * 2 ** p * eps ** -p * math.log(4 / eps) ** 2
    if levels is None:
        if not 0 < eps < 1:
            raise BoundDomainError("the p < 2 inner infimum runs over eps in (0, 1)")
        s0, s1 = _geometric_sums(p)
        ball = math.sqrt(g / n) * 2 ** (3.5 + p) * eps ** (1 - p / 2) * (s0 * math.log(1 / eps) + math.log(2) * s1)
    else:
        qv = 2.0 ** ((p - 2) / 2)
        series = sum(qv ** k * (math.log(1 / eps) + (k + 3) * math.log(2)) for k in range(1, levels + 1))
        ball = math.sqrt(g / n) * 2 ** (3.5 + p) * eps ** (1 - p / 2) * series + 2.0 ** -levels * eps
    return 2 * ball + 8 * b * h_half / n + math.sqrt(2 * r * h_half / n)


def cor34_bound(regime: EntropyRegime, b, r, n, cmode=UNIT, eps_grid=None, return_argmin=False):
    """Polylog entropy gamma eps^-p log^2(2/eps), split by p < 2, p = 2, p > 2."""
    _require(regime, "polylog")
    if regime.scale != 2.0:
        raise ValueError("the corollary is stated for log^2(2/eps)")
    cmode = _cmode(cmode)
    p = regime.p
    if r < 0:
        raise BoundDomainError("r must be nonnegative")
    argmin = None
    if p < 2:
        grid = eps_grid if eps_grid is not None else default_eps_grid(1e-4, 0.5)
        grid = [e for e in grid if 0 < e < 1]
        if cmode.choice == "traced":
            value, argmin = _grid_min(lambda e: cor34_traced_at(regime, b, r, n, e), grid)
        else:
            def unit(e):
                l4 = math.log(4 / e) ** 2
                return n ** -0.5 * e ** (1 - p / 2) * math.log(1 / e) + e ** -p * l4 / n + math.sqrt(r * e ** -p * l4 / n)
            value, argmin = _grid_min(unit, grid)
            value *= cmode.multiplier
    elif cmode.choice == "traced":
        levels = _dyadic_depth(n, 2 if p == 2 else p)
        value, argmin = cor34_traced_at(regime, b, r, n, 1.0, levels), 1.0
    elif p == 2:
        value = cmode.multiplier * (n ** -0.5 * math.log(n) ** 2 + math.sqrt(r / n))
    else:
        value = cmode.multiplier * (n ** (-1 / p) * math.log(n) + math.sqrt(r / n))
    return (value, argmin) if return_argmin else value


def cor35_traced_at(regime, b, r, n, eps, levels=None):
    """Explicit-constant polynomial-entropy bound at eps; levels=None sums the full series (p < 2)."""
    g, p = regime.gamma, regime.p
    h_half = g * 2 ** p * eps ** -p
    qv = 2.0 ** ((p - 2) / 2)
    if levels is None:
        if p >= 2:
            raise BoundDomainError("the full series converges only for p < 2")
        ball = math.sqrt(g / n) * 2 ** (3.5 + p) * eps ** (1 - p / 2) * _geometric_sums(p)[0]
    else:
        series = sum(qv ** k for k in range(1, levels + 1))
        ball = math.sqrt(g / n) * 2 ** (3.5 + p) * eps ** (1 - p / 2) * series + 2.0 ** -levels * eps
    return 2 * ball + 8 * b * h_half / n + math.sqrt(2 * r * h_half / n)


def cor35_bound(regime: EntropyRegime, b, r, n, cmode=UNIT, eps_grid=None, return_argmin=False):
    """Polynomial entropy gamma eps^-p, split by p < 2, p = 2, p > 2."""
    _require(regime, "poly")
    cmode = _cmode(cmode)
    p = regime.p
    if r < 0:
        raise BoundDomainError("r must be nonnegative")
    argmin = None
    if p < 2:
        grid = eps_grid if eps_grid is not None else default_eps_grid(1e-4, 1.0)
        if cmode.choice == "traced":
            value, argmin = _grid_min(lambda e: cor35_traced_at(regime, b, r, n, e), grid)
        else:
            def unit(e):
                return n ** -0.5 * e ** (1 - p / 2) + e ** -p / n + math.sqrt(r * e ** -p / n)
            value, argmin = _grid_min(unit, grid)
            value *= cmode.multiplier
    elif cmode.choice == "traced":
        levels = _dyadic_depth(n, 2 if p == 2 else p)
        value, argmin = cor35_traced_at(regime, b, r, n, 1.0, levels), 1.0
    elif p == 2:
        value = cmode.multiplier * (n ** -0.5 * math.log(n) + math.sqrt(r) * n ** -0.5)
    else:
        value = cmode.multiplier * (n ** (-1 / p) + math.sqrt(r) * n ** -0.5)
    return (value, argmin) if return_argmin else value


# --- earlier bounds used for comparison ----------------------------------------


def _baseline_constant(cmode):
    cmode = _cmode(cmode)
    if cmode.choice == "traced":
        raise ValueError("comparison bounds carry no traced constants; use unit or user")
    return cmode.multiplier


def mendelson_logpoly(d, p, gamma, b, r, n, cmode=UNIT):
    """c max{(d/n) log^p(1/sqrt r), sqrt(d r / n) log^(p/2)(1/sqrt r)}, 0 < r < 1."""
    c = _baseline_constant(cmode)
    if not 0 < r < 1:
        raise BoundDomainError("needs 0 < r < 1 so that log(1/sqrt(r)) > 0")
    lg = math.log(1 / math.sqrt(r))
    return c * max(d / n * lg ** p, math.sqrt(d * r / n) * lg ** (p / 2))


def mendelson_poly(p, b, r, n, cmode=UNIT):
    """c (n^(-2/(p+2)) + n^(-1/2) r^((2-p)/4)), 0 < p < 2."""
    c = _baseline_constant(cmode)
    if not 0 < p < 2:
        raise BoundDomainError("stated only for 0 < p < 2")
    if r < 0:
        raise BoundDomainError("r must be nonnegative")
    return c * (n ** (-2 / (p + 2)) + n ** -0.5 * r ** ((2 - p) / 4))


def mendelson_polylog(p, b, r, n, cmode=UNIT):
    """c (n^(-2/(p+2)) log^(4/(2+p))(2/r) + n^(-1/2) r^((2-p)/4) log(2/r)), 0 < p < 2."""
    c = _baseline_constant(cmode)
    if not 0 < p < 2:
        raise BoundDomainError("stated only for 0 < p < 2")
    if not 0 < r <= 2:
        raise BoundDomainError("needs 0 < r <= 2 so that log(2/r) >= 0")
    lg = math.log(2 / r)
    return c * (n ** (-2 / (p + 2)) * lg ** (4 / (2 + p)) + n ** -0.5 * r ** ((2 - p) / 4) * lg)


@dataclass(frozen=True)
class Remark35Row:
    r: float
    branch: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class Remark35Report:
    p: float
    n: float
    rows: tuple

    @property
    def holds(self):
        return all(row.holds for row in self.rows)


def compare_remark35(p, n, r_grid) -> Remark35Report:
    """Check the two dominance inequalities on either side of r = n^(-2/(p+2)).

    small r:  sqrt(r) n^(-1/(p+2)) <= n^(-1/2) r^((2-p)/4)
    large r:  r^(-p/2) / n <= n^(-2/(p+2))
    """
    threshold = n ** (-2 / (p + 2))
    rows = []
    for r in r_grid:
        r = float(r)
        if r <= threshold:
            lhs, rhs, branch = math.sqrt(r) * n ** (-1 / (p + 2)), n ** -0.5 * r ** ((2 - p) / 4), "small"
        else:
            lhs, rhs, branch = r ** (-p / 2) / n, threshold, "large"
        rows.append(Remark35Row(r, branch, lhs, rhs, lhs <= rhs * (1 + REL_TOL)))
    return Remark35Report(float(p), float(n), tuple(rows))


# --- curves --------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurve:
    points: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        rs = [r for r, _ in self.points]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("curve radii must be strictly increasing")
        if any(not math.isfinite(v) or v < 0 for _, v in self.points):
            raise ValueError("curve values must be finite and nonnegative")

    @property
    def r(self):
        return np.array([r for r, _ in self.points])

    @property
    def values(self):
        return np.array([v for _, v in self.points])

    def params_hash(self):
        blob = json.dumps(self.meta, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def make_curve(func, r_grid, **meta) -> BoundCurve:
    return BoundCurve(tuple((float(r), float(func(float(r)))) for r in sorted(r_grid)), meta)


@dataclass(frozen=True)
class CurveDiagnostics:
    monotone_nondecreasing: bool
    subroot: bool
    r_to_zero_limit_kind: str


def curve_diagnostics(curve: BoundCurve) -> CurveDiagnostics:
    """Grid checks: value nondecreasing in r, value/sqrt(r) nonincreasing, behaviour as r -> 0."""
    if len(curve.points) < 3:
        raise ValueError("diagnostics need at least 3 curve points")
    r, v = curve.r, curve.values
    scale = max(float(np.abs(v).max()), 1e-300)
    monotone = bool(np.all(np.diff(v) >= -REL_TOL * scale))
    positive = r > 0
    ratio = v[positive] / np.sqrt(r[positive])
    subroot = bool(np.all(v >= 0) and monotone
                   and np.all(np.diff(ratio) <= REL_TOL * np.maximum(np.abs(ratio[:-1]), 1e-300)))
    kind = "increasing" if v[0] > v[1] > v[2] else "bounded"
    return CurveDiagnostics(monotone, subroot, kind)


def curves_csv(curves) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("bound_name", "params_hash", "r", "value"))
    for curve in curves:
        h = curve.params_hash()
        for r, v in curve.points:
            writer.writerow([curve.meta.get("name", ""), h, repr(r), repr(v)])
    return buf.getvalue()


def comparison_csv(r_values, ours, baseline) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("r", "ours", "baseline", "ratio"))
    for r, a, c in zip(r_values, ours, baseline):
        writer.writerow([repr(float(r)), repr(float(a)), repr(float(c)), repr(float(a / c)) if c else "inf"])
    return buf.getvalue()


# --- named bounds as functions of r ----------------------------------------------

_REGIMES = {
    "logpoly": lambda q: EntropyRegime.logpoly(q["d"], q["p"], q["gamma"]),
    "polylog": lambda q: EntropyRegime.polylog(q["gamma"], q["p"], q.get("scale", 2.0)),
    "poly": lambda q: EntropyRegime.poly(q["gamma"], q["p"]),
}

BOUND_DEFAULTS = {"d": 1.0, "p": 1.0, "gamma": 1.0, "b": 1.0, "n": 100.0, "N": 2, "cmode": "unit"}


def _named(name, q):
    cm = q["cmode"]
    if name == "massart":
        return lambda r: massart_bound(q["N"], r, q["n"])
    if name == "cor33":
        reg = _REGIMES["logpoly"](q)
        return lambda r: cor33_bound(reg, q["b"], r, q["n"], cm, q.get("branch"))
    if name == "cor34":
        reg = _REGIMES["polylog"](q)
        return lambda r: cor34_bound(reg, q["b"], r, q["n"], cm)
    if name == "cor35":
        reg = _REGIMES["poly"](q)
        return lambda r: cor35_bound(reg, q["b"], r, q["n"], cm)
    if name == "theorem32":
        reg = _REGIMES[q.get("kind", "logpoly")](q)
        return lambda r: theorem32_bound(reg, r, q["b"], q["n"]).value
    if name == "mendelson_logpoly":
        return lambda r: mendelson_logpoly(q["d"], q["p"], q["gamma"], q["b"], r, q["n"], cm)
    if name == "mendelson_poly":
        return lambda r: mendelson_poly(q["p"], q["b"], r, q["n"], cm)
    if name == "mendelson_polylog":
        return lambda r: mendelson_polylog(q["p"], q["b"], r, q["n"], cm)
    raise KeyError(name)


BOUND_NAMES = ("massart", "cor33", "cor34", "cor35", "theorem32", "mendelson_logpoly", "mendelson_poly",
               "mendelson_polylog")


def bound_function(name, **params):
    """r -> value for a named bound; unspecified parameters take ``BOUND_DEFAULTS``."""
    if name not in BOUND_NAMES:
        raise ValueError(f"unknown bound {name!r}; expected one of {', '.join(BOUND_NAMES)}")
    q = dict(BOUND_DEFAULTS)
    q.update({k: v for k, v in params.items() if v is not None})
    q["cmode"] = _cmode(q["cmode"])
    return _named(name, q), q
