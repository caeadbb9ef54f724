"""Samples, synthetic function families and their projections onto samples."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from radbound.regimes import EntropyRegime

DEDUP_TOL = 1e-12
MINUS_FAMILY_CAP = 50_000


class DegenerateFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class SamplePlan:
    n: int
    dim: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sample size must be >= 1, got {self.n}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Uniform empirical measure on ``points`` (shape n x dim)."""

    points: np.ndarray
    seed: int | None = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def weights(self):
        return np.full(self.n, 1.0 / self.n)


def draw_sample(plan: SamplePlan) -> EmpiricalSample:
    rng = np.random.default_rng(plan.seed)
    return EmpiricalSample(rng.uniform(0.0, 1.0, size=(plan.n, plan.dim)), seed=plan.seed)


def uniform_points(rng, n, dim):
    return rng.uniform(0.0, 1.0, size=(n, dim))


# --- family specifications -------------------------------------------------


class FamilySpec:
    """Base for the family variants; subclasses provide ``evaluate``.

    ``evaluate(points)`` returns an (M x n) table with one row per family
    member, before deduplication.
    """

    variant: str = ""
    dim: int = 1

    @property
    def sup_bound(self) -> float:
        raise NotImplementedError

    @property
    def declared_regime(self) -> EntropyRegime | None:
        return None

    @property
    def size(self) -> int:
        raise NotImplementedError

    def evaluate(self, points) -> np.ndarray:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def _check_points(self, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.shape[1] != self.dim:
            raise ValueError(
                f"{self.variant} family lives on [0,1]^{self.dim}, sample has dim {points.shape[1]}"
            )
        return points


@dataclass(frozen=True)
class FiniteRandom(FamilySpec):
    """m random sinusoids b * a_i * sin(2 pi <k_i, x> + phi_i).

    Integer frequencies make the population second moment exactly
    (b a_i)^2 / 2 under the uniform law, which tests use as an oracle.
    """

    m: int
    b: float = 1.0
    seed: int = 0
    dim: int = 1
    variant = "finite_random"

    def __post_init__(self):
        if self.m < 1 or self.b <= 0 or self.dim < 1:
            raise ValueError("FiniteRandom needs m >= 1, b > 0, dim >= 1")

    def _params(self):
        rng = np.random.default_rng(self.seed)
        amp = rng.uniform(0.0, 1.0, self.m)
        freq = rng.integers(1, 4, size=(self.m, self.dim))
        phase = rng.uniform(0.0, 2 * np.pi, self.m)
        return amp, freq, phase

    @property
    def amplitudes(self):
        return self._params()[0]

    def population_second_moments(self):
        return (self.b * self.amplitudes) ** 2 / 2.0

    @property
    def sup_bound(self):
        return float(self.b)

    @property
    def size(self):
        return self.m

    @property
    def declared_regime(self):
        # log N <= log m <= log m * log(gamma/eps) once eps <= diameter <= 2b
        return EntropyRegime.logpoly(d=math.log(max(self.m, 2)), p=1.0, gamma=2 * math.e * self.b)

    def evaluate(self, points):
        points = self._check_points(points)
        amp, freq, phase = self._params()
        arg = 2 * np.pi * (freq @ points.T) + phase[:, None]
        return np.clip(self.b * amp[:, None] * np.sin(arg), -self.b, self.b)

    def to_config(self):
        return {"variant": self.variant, "m": self.m, "b": self.b, "seed": self.seed, "dim": self.dim}


@dataclass(frozen=True)
class LinearBall(FamilySpec):
    """clip(<w, 2x - 1>, -b, b) for grid weights w with |w|_2 <= radius.

    The weight grid has ``count`` points per axis on [-radius, radius].
    """

    d: int = 2
    radius: float = 1.0
    count: int = 5
    b: float = 1.0
    variant = "linear_ball"

    def __post_init__(self):
        if self.d < 1 or self.radius < 0 or self.count < 1 or self.b <= 0:
            raise ValueError("LinearBall needs d >= 1, radius >= 0, count >= 1, b > 0")

    @property
    def dim(self):
        return self.d

    def weights(self):
        if self.radius == 0 or self.count == 1:
            return np.zeros((1, self.d))
        axis = np.linspace(-self.radius, self.radius, self.count)
        grid = np.array(list(itertools.product(axis, repeat=self.d)))
        keep = np.linalg.norm(grid, axis=1) <= self.radius * (1 + 1e-12)
        return grid[keep]

    @property
    def size(self):
        return len(self.weights())

    @property
    def sup_bound(self):
        return float(self.b)

    @property
    def declared_regime(self):
        # features 2x-1 have norm <= sqrt(d); improper eps/2 nets of the
        # weight ball give gamma = 6 * radius * sqrt(d)
        gamma = max(6 * self.radius * math.sqrt(self.d), 1e-12)
        return EntropyRegime.logpoly(d=float(self.d), p=1.0, gamma=gamma)

    def evaluate(self, points):
        points = self._check_points(points)
        feats = 2.0 * points - 1.0
        return np.clip(self.weights() @ feats.T, -self.b, self.b)

    def to_config(self):
        return {"variant": self.variant, "d": self.d, "radius": self.radius, "count": self.count, "b": self.b}


@dataclass(frozen=True)
class LipschitzBall(FamilySpec):
    """Piecewise-linear L-Lipschitz paths on [0,1] with grid values.

    Knots at j/resolution; knot values on the grid of step L/resolution
    inside [-b, b]; consecutive knots move by at most one grid step.
    """

    lipschitz: float = 1.0
    b: float = 1.0
    resolution: int = 4
    variant = "lipschitz_ball"
    dim = 1

    def __post_init__(self):
        if self.lipschitz <= 0 or self.b <= 0 or self.resolution < 1:
            raise ValueError("LipschitzBall needs lipschitz > 0, b > 0, resolution >= 1")

    def levels(self):
        step = self.lipschitz / self.resolution
        top = math.floor(self.b / step + 1e-9)
        return np.arange(-top, top + 1) * step

    def knot_values(self):
        """All admissible knot-value paths, one row per path."""
        n_levels = len(self.levels())
        paths = np.arange(n_levels)[:, None]
        for _ in range(self.resolution):
            ext = (paths[:, -1:] + np.array([-1, 0, 1])[None, :]).reshape(-1, 1)
            paths = np.repeat(paths, 3, axis=0)
            paths = np.hstack([paths, ext])
            paths = paths[(paths[:, -1] >= 0) & (paths[:, -1] < n_levels)]
        return self.levels()[paths]

    @property
    def size(self):
        return len(self.knot_values())

    @property
    def sup_bound(self):
        return float(self.b)

    @property
    def declared_regime(self):
        # sup-norm nets of the Lipschitz ball: log N(eps) <= log(4b/eps)
        # + (L/eps + 1) log 3 for eps <= 2b; doubled for proper covers
        gamma = 2 * (4 * self.b / math.e + (self.lipschitz + 2 * self.b) * math.log(3))
        return EntropyRegime.poly(gamma=gamma, p=1.0)

    def evaluate(self, points):
        points = self._check_points(points)
        knots = np.linspace(0.0, 1.0, self.resolution + 1)
        vals = self.knot_values()
        x = points[:, 0]
        idx = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, self.resolution - 1)
        t = (x - knots[idx]) * self.resolution
        return vals[:, idx] * (1 - t) + vals[:, idx + 1] * t

    def to_config(self):
        return {"variant": self.variant, "lipschitz": self.lipschitz, "b": self.b, "resolution": self.resolution}


@dataclass(frozen=True)
class ConstantFamily(FamilySpec):
    """Constant functions x -> c for each c in ``values``."""

    values: tuple = (0.0,)
    b: float | None = None
    dim: int = 1
    variant = "constant"

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("ConstantFamily needs at least one value")
        if self.b is not None and max(abs(v) for v in self.values) > self.b:
            raise ValueError("constant exceeds the declared cap b")

    @property
    def sup_bound(self):
        if self.b is not None:
            return float(self.b)
        return max(max(abs(v) for v in self.values), 1e-300)

    @property
    def size(self):
        return len(self.values)

    def population_second_moments(self):
        return np.asarray(self.values, dtype=np.float64) ** 2

    @property
    def declared_regime(self):
        return EntropyRegime.logpoly(d=math.log(max(len(self.values), 2)), p=1.0,
                                     gamma=2 * math.e * self.sup_bound)

    def evaluate(self, points):
        points = self._check_points(points)
        return np.repeat(np.asarray(self.values, dtype=np.float64)[:, None], points.shape[0], axis=1)

    def to_config(self):
        out = {"variant": self.variant, "values": ",".join(repr(float(v)) for v in self.values), "dim": self.dim}
        if self.b is not None:
            out["b"] = self.b
        return out


_VARIANTS = {
    "finite_random": (FiniteRandom, {"m": int, "b": float, "seed": int, "dim": int}),
    "linear_ball": (LinearBall, {"d": int, "radius": float, "count": int, "b": float}),
    "lipschitz_ball": (LipschitzBall, {"lipschitz": float, "b": float, "resolution": int}),
    "constant": (ConstantFamily, {"values": None, "b": float, "dim": int}),
}


def family_from_config(section: dict) -> FamilySpec:
    """Build a family spec from string key/values (a config section)."""
    section = dict(section)
    variant = section.pop("variant", None)
    if variant not in _VARIANTS:
        raise ValueError(f"unknown family variant {variant!r}; expected one of {sorted(_VARIANTS)}")
    cls, fields = _VARIANTS[variant]
    kwargs = {}
    for key, raw in section.items():
        if key not in fields:
            raise ValueError(f"unknown key {key!r} for family variant {variant}")
        if key == "values":
            kwargs[key] = tuple(float(v) for v in str(raw).split(",") if v.strip())
        else:
            kwargs[key] = fields[key](raw)
    return cls(**kwargs)


# --- projections ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectedFamily:
    """An m x n table of function values on a sample, |values| <= sup_bound."""

    values: np.ndarray
    sup_bound: float
    provenance: dict = field(default_factory=dict)
    members: np.ndarray | None = None
    subsampled: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("ProjectedFamily needs a nonempty 2-d table")
        if self.sup_bound <= 0:
            raise ValueError("sup_bound must be positive")
        if np.abs(values).max() > self.sup_bound * (1 + 1e-12):
            raise ValueError("table entry exceeds sup_bound")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def second_moments(self):
        return np.mean(self.values ** 2, axis=1)

    def subfamily(self, rows) -> "ProjectedFamily":
        rows = np.asarray(rows, dtype=np.int64)
        members = None if self.members is None else self.members[rows]
        return ProjectedFamily(self.values[rows], self.sup_bound, dict(self.provenance), members, self.subsampled)


def dedup_rows(values, tol=DEDUP_TOL):
    """Indices of first occurrences after merging rows equal up to ``tol`` (max-norm grid)."""
    keys = np.round(np.asarray(values) / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def from_table(values, sup_bound=None, **provenance) -> ProjectedFamily:
    """Wrap an explicit table (deduplicated) as a ProjectedFamily."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if sup_bound is None:
        sup_bound = max(float(np.abs(values).max()), 1e-300)
    keep = dedup_rows(values)
    return ProjectedFamily(values[keep], sup_bound, provenance, members=keep)


def project(spec: FamilySpec, sample: EmpiricalSample) -> ProjectedFamily:
    table = spec.evaluate(sample.points)
    if table.shape[0] == 0:
        raise DegenerateFamilyError(f"{spec.variant} family has no members")
    keep = dedup_rows(table)
    if len(keep) == 0:
        raise DegenerateFamilyError("family is empty after deduplication")
    return ProjectedFamily(
        table[keep],
        spec.sup_bound,
        {"family": spec.to_config(), "sample_seed": sample.seed, "n": sample.n},
        members=keep,
    )


def minus_family(pf: ProjectedFamily, cap=MINUS_FAMILY_CAP, seed=0) -> ProjectedFamily:
    """All differences f - g of rows, deduplicated; subsampled beyond ``cap`` rows."""
    v = pf.values
    diffs = (v[:, None, :] - v[None, :, :]).reshape(-1, v.shape[1])
    keep = dedup_rows(diffs)
    subsampled = False
    if len(keep) > cap:
        zero_pos = np.flatnonzero(np.all(np.abs(diffs[keep]) <= DEDUP_TOL, axis=1))[0]
        rng = np.random.default_rng(seed)
        others = np.delete(np.arange(len(keep)), zero_pos)
        picked = rng.choice(others, size=cap - 1, replace=False)
        keep = np.sort(keep[np.concatenate([[zero_pos], picked])])
        subsampled = True
    prov = dict(pf.provenance)
    prov["derived"] = "minus"
    return ProjectedFamily(diffs[keep], 2 * pf.sup_bound, prov, members=None, subsampled=subsampled)
