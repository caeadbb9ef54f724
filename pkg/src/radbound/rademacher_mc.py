"""Exact and Monte Carlo estimators of (local) Rademacher complexities.

Random streams: every task draws from ``default_rng([seed, stream, task])``
and reductions run in task order, so results do not depend on the number
of worker threads.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from radbound import kernels
from radbound.family_lab import FamilySpec, ProjectedFamily, uniform_points

EXACT_MAX_N = 16
DEFAULT_SIGN_DRAWS = 2000
DEFAULT_OUTER_DRAWS = 200
GHOST_FACTOR = 100
FEASIBLE_RTOL = 1e-12

_GHOST, _OUTER, _RADIUS, _SYMM = 0, 1, 2, 3


class ExactEnumerationError(ValueError):
    pass


@dataclass(frozen=True)
class RadiusSpec:
    r: float
    kind: str = "empirical"

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be nonnegative")
        if self.kind not in ("empirical", "population"):
            raise ValueError(f"unknown radius kind {self.kind!r}")


@dataclass(frozen=True)
class ComplexityEstimate:
    mean: float
    stderr: float
    draws: int
    mode: str
    empty_feasible: bool = False


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: int | None


def _radius(r):
    return r.r if isinstance(r, RadiusSpec) else float(r)


def _values(pf):
    return pf.values if isinstance(pf, ProjectedFamily) else np.atleast_2d(np.asarray(pf, dtype=np.float64))


def rademacher_signs(rng, draws, n):
    return rng.integers(0, 2, size=(draws, n)).astype(np.float64) * 2.0 - 1.0


def within_radius(second_moments, r):
    return np.flatnonzero(second_moments <= r * (1 + FEASIBLE_RTOL))


def sup_signed_mean(pf, signs, feasible=None) -> SupResult:
    """max over feasible rows of (1/n) sum_i sigma_i f(X_i); 0 when nothing is feasible."""
    values = _values(pf)
    signs = np.asarray(signs, dtype=np.float64)
    rows = np.arange(values.shape[0]) if feasible is None else np.asarray(sorted(feasible), dtype=np.int64)
    if len(rows) == 0:
        return SupResult(0.0, None)
    scores = values[rows] @ signs / values.shape[1]
    k = int(np.argmax(scores))
    return SupResult(float(scores[k]), int(rows[k]))


def expected_sup(values, mode="exact", draws=DEFAULT_SIGN_DRAWS, rng=None) -> ComplexityEstimate:
    """E_sigma max_i (1/n) sum_j sigma_j values[i, j] for a nonempty table."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n = values.shape[1]
    if mode == "exact":
        if n > EXACT_MAX_N:
            raise ExactEnumerationError(f"exact enumeration limited to n <= {EXACT_MAX_N} (got n={n})")
        return ComplexityEstimate(kernels.exact_sign_average(values), 0.0, 1 << n, "exact")
    if mode != "monte-carlo":
        raise ValueError(f"unknown estimation mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    sups = (rademacher_signs(rng, draws, n) @ values.T).max(axis=1) / n
    stderr = float(sups.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return ComplexityEstimate(float(sups.mean()), stderr, draws, "monte-carlo")


def local_rc_empirical(pf, r, mode="exact", draws=DEFAULT_SIGN_DRAWS, seed=0) -> ComplexityEstimate:
    """E_sigma R_n{f in F : P_n f^2 <= r}."""
    values = _values(pf)
    feasible = within_radius(np.mean(values ** 2, axis=1), _radius(r))
    if len(feasible) == 0:
        return ComplexityEstimate(0.0, 0.0, (1 << values.shape[1]) if mode == "exact" else draws, mode, True)
    return expected_sup(values[feasible], mode, draws, np.random.default_rng(seed))


# --- population quantities ----------------------------------------------------


def ghost_second_moments(spec: FamilySpec, ghost_n, seed=0):
    """Ghost-sample estimates of P f^2 for every member of ``spec``."""
    rng = np.random.default_rng([seed, _GHOST])
    points = uniform_points(rng, ghost_n, spec.dim)
    out = np.zeros(spec.size)
    for start in range(0, ghost_n, 4096):
        out += np.sum(spec.evaluate(points[start:start + 4096]) ** 2, axis=1)
    return out / ghost_n


def population_moments(spec: FamilySpec, ghost_n, seed=0):
    """Exact P f^2 when the family provides it, else the ghost-sample estimate."""
    exact = getattr(spec, "population_second_moments", None)
    if exact is not None:
        return np.asarray(exact(), dtype=np.float64)
    return ghost_second_moments(spec, ghost_n, seed)


def _map_tasks(func, count, workers):
    if workers <= 1:
        return [func(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(count)))


def _summarize(per_outer, sign_draws):
    per_outer = np.asarray(per_outer)
    k = len(per_outer)
    stderr = float(per_outer.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return ComplexityEstimate(float(per_outer.mean()), stderr, k * sign_draws, "monte-carlo")


def local_rc_population_curve(spec: FamilySpec, r_grid, n, ghost_n=None, outer_draws=DEFAULT_OUTER_DRAWS,
                              sign_draws=DEFAULT_SIGN_DRAWS, seed=0, workers=1, pop_moments=None):
    """Estimates of E R_n{f : P f^2 <= r} for every r in ``r_grid``.

    Feasibility is fixed once by ghost-sample second moments; each outer
    draw is a fresh sample of size n with ``sign_draws`` sign vectors.
    """
    r_grid = [float(r) for r in r_grid]
    if pop_moments is None:
        pop_moments = population_moments(spec, ghost_n or GHOST_FACTOR * n, seed)
    order = np.argsort(pop_moments, kind="stable")
    sorted_moments = pop_moments[order]
    counts = [int(np.searchsorted(sorted_moments, r * (1 + FEASIBLE_RTOL), side="right")) for r in r_grid]
    top = max(counts)
    if top == 0:
        return [ComplexityEstimate(0.0, 0.0, outer_draws * sign_draws, "monte-carlo", True) for _ in r_grid]
    active = order[:top]

    def one(o):
        rng = np.random.default_rng([seed, _OUTER, o])
        table = spec.evaluate(uniform_points(rng, n, spec.dim))[active]
        scores = rademacher_signs(rng, sign_draws, n) @ table.T / n
        prefix = np.maximum.accumulate(scores, axis=1)
        return [float(prefix[:, c - 1].mean()) if c > 0 else 0.0 for c in counts]

    per_outer = np.asarray(_map_tasks(one, outer_draws, workers))
    out = []
    for j, c in enumerate(counts):
        if c == 0:
            out.append(ComplexityEstimate(0.0, 0.0, outer_draws * sign_draws, "monte-carlo", True))
        else:
            out.append(_summarize(per_outer[:, j], sign_draws))
    return out


def local_rc_population(spec: FamilySpec, r, n, ghost_n=None, outer_draws=DEFAULT_OUTER_DRAWS,
                        sign_draws=DEFAULT_SIGN_DRAWS, seed=0, workers=1) -> ComplexityEstimate:
    """E R_n{f in F : P f^2 <= r} by ghost feasibility and nested Monte Carlo."""
    return local_rc_population_curve(spec, [_radius(r)], n, ghost_n, outer_draws, sign_draws, seed, workers)[0]


@dataclass(frozen=True)
class RadiusResult:
    value: float
    empty_feasible: bool


def empirical_radius(spec: FamilySpec, sample, r, ghost_n=None, seed=0, pop_moments=None) -> RadiusResult:
    """sup over {f : P f^2 <= r} of P_n f^2 on ``sample``."""
    points = sample.points if hasattr(sample, "points") else np.atleast_2d(sample)
    if pop_moments is None:
        pop_moments = population_moments(spec, ghost_n or GHOST_FACTOR * points.shape[0], seed)
    feasible = within_radius(pop_moments, _radius(r))
    if len(feasible) == 0:
        return RadiusResult(0.0, True)
    table = spec.evaluate(points)[feasible]
    return RadiusResult(float(np.max(np.mean(table ** 2, axis=1))), False)


@dataclass(frozen=True)
class RadiusCheck:
    lhs: float
    lhs_stderr: float
    lhs_variant: float
    lhs_variant_stderr: float
    rhs_as_printed: float
    rhs_stderr: float
    holds: bool
    holds_variant: bool
    margin: float


def radius_expectation_check(spec: FamilySpec, r, n, trials=200, seed=0, sign_draws=DEFAULT_SIGN_DRAWS,
                             ghost_n=None, workers=1) -> RadiusCheck:
    """E sqrt(r_hat) against r + 4 b E R_n{P f^2 <= r}, plus the E r_hat reading.

    Both verdicts allow a 3-stderr Monte Carlo margin.
    """
    r = _radius(r)
    pop = population_moments(spec, ghost_n or GHOST_FACTOR * n, seed)
    feasible = within_radius(pop, r)

    def one(t):
        if len(feasible) == 0:
            return 0.0
        rng = np.random.default_rng([seed, _RADIUS, t])
        table = spec.evaluate(uniform_points(rng, n, spec.dim))[feasible]
        return float(np.max(np.mean(table ** 2, axis=1)))

    rhat = np.asarray(_map_tasks(one, trials, workers))
    est = local_rc_population_curve(spec, [r], n, outer_draws=trials, sign_draws=sign_draws, seed=seed,
                                    workers=workers, pop_moments=pop)[0]
    b = spec.sup_bound
    rhs = r + 4 * b * est.mean
    rhs_se = 4 * b * est.stderr

    def mean_se(x):
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0

    lhs, lhs_se = mean_se(np.sqrt(rhat))
    lhs2, lhs2_se = mean_se(rhat)
    return RadiusCheck(
        lhs, lhs_se, lhs2, lhs2_se, rhs, rhs_se,
        holds=lhs <= rhs + 3 * math.hypot(lhs_se, rhs_se),
        holds_variant=lhs2 <= rhs + 3 * math.hypot(lhs2_se, rhs_se),
        margin=rhs - lhs,
    )


# --- structural inequalities ------------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear map through (xs[k], ys[k]), constant beyond the end knots."""

    xs: tuple
    ys: tuple

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("need at least two knots with matching values")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("knots must be strictly increasing")

    @property
    def lipschitz(self):
        return float(np.max(np.abs(np.diff(self.ys) / np.diff(self.xs))))

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    holds: bool


def contraction_check(pf, phi, lipschitz=None) -> InequalityReport:
    """Exact E_sigma R_n(phi o F) <= L * E_sigma R_n(F)."""
    values = _values(pf)
    if values.shape[1] > EXACT_MAX_N:
        raise ExactEnumerationError(f"contraction check enumerates signs; needs n <= {EXACT_MAX_N}")
    if lipschitz is None:
        if not isinstance(phi, PiecewiseLinear):
            raise ValueError("pass the Lipschitz constant for a general map")
        lipschitz = phi.lipschitz
    lhs = kernels.exact_sign_average(np.asarray(phi(values), dtype=np.float64))
    rhs = lipschitz * kernels.exact_sign_average(values)
    return InequalityReport(lhs, rhs, lhs <= rhs + 1e-12 * (1 + abs(rhs)))


@dataclass(frozen=True)
class SymmetrizationReport:
    deviation: float
    deviation_stderr: float
    squared_rc: float
    squared_rc_stderr: float
    scaled_rc: float
    scaled_rc_stderr: float
    holds: bool


def symmetrization_check(spec: FamilySpec, r, n, trials=2000, seed=0, sign_draws=64, ghost_n=None,
                         workers=1) -> SymmetrizationReport:
    """E sup(P_n f^2 - P f^2) <= 2 E R_n{f^2} <= 4 b E R_n{f} on {P f^2 <= r}.

    Each link is accepted within 3 combined standard errors.
    """
    r = _radius(r)
    pop = population_moments(spec, ghost_n or GHOST_FACTOR * n, seed)
    feasible = within_radius(pop, r)
    b = spec.sup_bound
    if len(feasible) == 0:
        return SymmetrizationReport(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, True)

    def one(t):
        rng = np.random.default_rng([seed, _SYMM, t])
        table = spec.evaluate(uniform_points(rng, n, spec.dim))[feasible]
        dev = float(np.max(np.mean(table ** 2, axis=1) - pop[feasible]))
        signs = rademacher_signs(rng, sign_draws, n)
        sq = float((signs @ (table ** 2).T).max(axis=1).mean() / n)
        lin = float((signs @ table.T).max(axis=1).mean() / n)
        return dev, 2 * sq, 4 * b * lin

    res = np.asarray(_map_tasks(one, trials, workers))
    means = res.mean(axis=0)
    ses = res.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(3)
    holds = bool(means[0] <= means[1] + 3 * math.hypot(ses[0], ses[1])
                 and means[1] <= means[2] + 3 * math.hypot(ses[1], ses[2]))
    return SymmetrizationReport(float(means[0]), float(ses[0]), float(means[1]), float(ses[1]),
                                float(means[2]), float(ses[2]), holds)


RC_CSV_COLUMNS = ("seed", "n", "m", "r", "kind", "mode", "mean", "stderr", "draws")


def estimates_csv(records) -> str:
    """CSV text for (seed, n, m, r, kind, ComplexityEstimate) records."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RC_CSV_COLUMNS)
    for seed, n, m, r, kind, est in records:
        writer.writerow([seed, n, m, repr(float(r)), kind, est.mode, repr(est.mean), repr(est.stderr), est.draws])
    return buf.getvalue()
