"""Empirical L_q(P_n) metrics, proper covers, covering and packing counts.

Covers are always *proper*: members are rows of the family itself.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from radbound import kernels
from radbound.family_lab import (
    FamilySpec,
    ProjectedFamily,
    SamplePlan,
    draw_sample,
    minus_family,
    project,
)
from radbound.regimes import (  # noqa: F401  (re-exported)
    EntropyDomainError,
    EntropyEvaluator,
    EntropyRegime,
    regime_entropy,
    star_hull_regime,
)

EXACT_MAX_ROWS = 16
LEMMA_EXACT_MAX_ROWS = 64
COVER_RTOL = 1e-12


class CoverSearchError(ValueError):
    """Exact cover requested on a family too large for subset search."""


@dataclass(frozen=True)
class CoverResult:
    member_indices: tuple
    eps: float
    q: float = 2.0
    mode: str = "exact"

    @property
    def size(self):
        return len(self.member_indices)


@dataclass(frozen=True)
class CountBound:
    value: int
    kind: str
    witness: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("exact", "greedy-upper", "packing-lower"):
            raise ValueError(f"unknown count kind {self.kind!r}")
        if self.value < 1:
            raise ValueError("counts are positive")


def empirical_distance(f, g, q=2.0) -> float:
    """((1/n) sum |f_i - g_i|^q)^(1/q)."""
    if q < 1:
        raise ValueError(f"norm order must be >= 1, got {q}")
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != g.shape or f.size == 0:
        raise ValueError("rows must be nonempty and of equal length")
    diff = np.abs(f - g)
    if q == 2.0:
        return float(np.sqrt(np.mean(diff * diff)))
    return float(np.mean(diff ** q) ** (1.0 / q))


def _values(pf):
    return pf.values if isinstance(pf, ProjectedFamily) else np.atleast_2d(np.asarray(pf, dtype=np.float64))


class CoverIndex:
    """Caches the pairwise distance matrix of a family for repeated cover queries."""

    def __init__(self, pf, q=2.0):
        if q < 1:
            raise ValueError(f"norm order must be >= 1, got {q}")
        self.values = _values(pf)
        self.q = float(q)
        self.dist = kernels.pairwise_distances(self.values, self.q)

    @property
    def m(self):
        return self.values.shape[0]

    def adjacency(self, eps, rows=None):
        d = self.dist if rows is None else self.dist[np.ix_(rows, rows)]
        return d <= eps * (1 + COVER_RTOL)

    def cover(self, eps, mode="exact", rows=None, exact_limit=EXACT_MAX_ROWS):
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps}")
        rows = np.arange(self.m) if rows is None else np.asarray(rows, dtype=np.int64)
        if len(rows) == 0:
            raise ValueError("cannot cover an empty family")
        adj = self.adjacency(eps, rows)
        if mode == "exact":
            if len(rows) > exact_limit:
                raise CoverSearchError(
                    f"exact cover limited to {exact_limit} rows (family has {len(rows)}); use mode='greedy'"
                )
            local = kernels.exact_cover(adj)
        elif mode == "greedy":
            local = kernels.greedy_cover(adj)
        elif mode == "auto":
            local = kernels.exact_cover(adj) if len(rows) <= exact_limit else kernels.greedy_cover(adj)
            mode = "exact" if len(rows) <= exact_limit else "greedy"
        else:
            raise ValueError(f"unknown cover mode {mode!r}")
        return CoverResult(tuple(int(i) for i in rows[local]), float(eps), self.q, mode)

    def count(self, eps, mode="exact", rows=None, exact_limit=EXACT_MAX_ROWS):
        res = self.cover(eps, mode, rows, exact_limit)
        return CountBound(res.size, "exact" if res.mode == "exact" else "greedy-upper")

    def packing(self, eps, rows=None):
        rows = np.arange(self.m) if rows is None else np.asarray(rows, dtype=np.int64)
        kept = []
        for i in rows:
            if not kept or bool(np.all(self.dist[i, kept] > 2 * eps)):
                kept.append(int(i))
        return kept


def proper_cover(pf, eps, q=2.0, mode="exact", exact_limit=EXACT_MAX_ROWS) -> CoverResult:
    return CoverIndex(pf, q).cover(eps, mode, exact_limit=exact_limit)


def covering_number(pf, eps, q=2.0, mode="exact", exact_limit=EXACT_MAX_ROWS) -> CountBound:
    return CoverIndex(pf, q).count(eps, mode, exact_limit=exact_limit)


def packing_number(pf, eps, q=2.0) -> CountBound:
    """Size of a greedy maximal 2 eps-separated subset (lower bound on N(eps))."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return CountBound(len(CoverIndex(pf, q).packing(eps)), "packing-lower")


def is_valid_cover(pf, cover: CoverResult) -> bool:
    values = _values(pf)
    members = values[list(cover.member_indices)]
    for row in values:
        if min(empirical_distance(row, c, cover.q) for c in members) > cover.eps * (1 + COVER_RTOL):
            return False
    return True


@dataclass(frozen=True)
class LemmaReport:
    lhs: int
    rhs: int
    holds: bool
    eps: float


def verify_minus_lemma(pf, eps, q=2.0, exact_limit=LEMMA_EXACT_MAX_ROWS) -> LemmaReport:
    """N(eps, F - F) <= N(eps/2, F)^2 with exact counts on both sides."""
    minus = minus_family(pf)
    lhs = covering_number(minus, eps, q, "exact", exact_limit).value
    rhs = covering_number(pf, eps / 2, q, "exact", exact_limit).value ** 2
    return LemmaReport(lhs, rhs, lhs <= rhs, float(eps))


def verify_subfamily_lemma(pf, subset, eps, q=2.0, exact_limit=LEMMA_EXACT_MAX_ROWS) -> LemmaReport:
    """N(eps, F_0) <= N(eps/2, F) for a sub-family F_0 with exact counts."""
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise ValueError("subset must be nonempty")
    index = CoverIndex(pf, q)
    lhs = index.count(eps, "exact", rows=subset, exact_limit=exact_limit).value
    rhs = index.count(eps / 2, "exact", exact_limit=exact_limit).value
    return LemmaReport(lhs, rhs, lhs <= rhs, float(eps))


def metric_capacity_probe(spec: FamilySpec, eps, q=2.0, trials=50, seed=0, n_range=(1, 32)) -> CountBound:
    """Max packing count over random (n, sample) draws; a lower estimate of sup_n sup_Pn N(eps)."""
    master = np.random.SeedSequence(seed)
    best = None
    for t, child in enumerate(master.spawn(trials)):
        rng = np.random.default_rng(child)
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        sample_seed = int(rng.integers(0, 2**63))
        pf = project(spec, draw_sample(SamplePlan(n=n, dim=spec.dim, seed=sample_seed)))
        value = packing_number(pf, eps, q).value
        if best is None or value > best[0]:
            best = (value, {"trial": t, "n": n, "sample_seed": sample_seed})
    return CountBound(best[0], "packing-lower", witness=best[1])


COVER_CSV_COLUMNS = ("family_id", "eps", "q", "mode", "count")


def cover_rows_csv(rows) -> str:
    """CSV text for (family_id, eps, q, mode, count) records."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COVER_CSV_COLUMNS)
    for row in rows:
        writer.writerow([row[0], repr(float(row[1])), repr(float(row[2])), row[3], int(row[4])])
    return buf.getvalue()
