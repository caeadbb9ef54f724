"""Analytic entropy models log N(eps) and transforms between them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


class EntropyDomainError(ValueError):
    """Raised when an entropy model is evaluated outside its validity domain."""


@dataclass(frozen=True)
class EntropyRegime:
    """One of three entropy growth models.

    logpoly:  d * log^p(gamma / eps),            0 < eps <= gamma
    polylog:  gamma * eps^-p * log^2(scale/eps), 0 < eps <= scale (scale = 2 by default)
    poly:     gamma * eps^-p,                    eps > 0
    """

    kind: str
    gamma: float
    p: float
    d: float = 1.0
    scale: float = 2.0

    def __post_init__(self):
        if self.kind not in ("logpoly", "polylog", "poly"):
            raise ValueError(f"unknown entropy regime {self.kind!r}")
        if self.gamma <= 0 or self.p <= 0 or self.d <= 0 or self.scale <= 0:
            raise ValueError("entropy regime parameters must be strictly positive")

    @classmethod
    def logpoly(cls, d, p, gamma):
        return cls("logpoly", gamma=float(gamma), p=float(p), d=float(d))

    @classmethod
    def polylog(cls, gamma, p, scale=2.0):
        return cls("polylog", gamma=float(gamma), p=float(p), scale=float(scale))

    @classmethod
    def poly(cls, gamma, p):
        return cls("poly", gamma=float(gamma), p=float(p))

    @property
    def cap(self) -> float:
        if self.kind == "logpoly":
            return self.gamma
        if self.kind == "polylog":
            return self.scale
        return math.inf

    def __call__(self, eps: float) -> float:
        return regime_entropy(self, eps)

    def to_config(self) -> dict:
        out = {"kind": self.kind, "gamma": self.gamma, "p": self.p}
        if self.kind == "logpoly":
            out["d"] = self.d
        if self.kind == "polylog" and self.scale != 2.0:
            out["scale"] = self.scale
        return out


def regime_entropy(regime: EntropyRegime, eps: float) -> float:
    if not eps > 0:
        raise EntropyDomainError(f"entropy needs eps > 0, got {eps}")
    if eps > regime.cap * (1 + 1e-12):
        raise EntropyDomainError(f"eps={eps} beyond validity cap {regime.cap} of {regime.kind}")
    if regime.kind == "logpoly":
        return regime.d * max(math.log(regime.gamma / eps), 0.0) ** regime.p
    if regime.kind == "polylog":
        return regime.gamma * eps ** (-regime.p) * max(math.log(regime.scale / eps), 0.0) ** 2
    return regime.gamma * eps ** (-regime.p)


@dataclass(frozen=True)
class EntropyEvaluator:
    """A callable eps -> entropy with an explicit upper end of its domain."""

    func: Callable[[float], float]
    cap: float
    label: str = ""

    def __call__(self, eps: float) -> float:
        if not eps > 0 or eps > self.cap * (1 + 1e-12):
            raise EntropyDomainError(f"eps={eps} outside (0, {self.cap}] for {self.label}")
        return self.func(eps)


def as_evaluator(source) -> EntropyEvaluator:
    if isinstance(source, EntropyEvaluator):
        return source
    if isinstance(source, EntropyRegime):
        return EntropyEvaluator(source, source.cap, source.kind)
    raise TypeError(f"not an entropy source: {source!r}")


def star_hull_regime(regime) -> EntropyEvaluator:
    """Entropy of the star hull at scale eps: log(4/eps) + H(eps/2)."""
    base = as_evaluator(regime)
    cap = min(4.0, 2 * base.cap)
    return EntropyEvaluator(lambda eps: math.log(4.0 / eps) + base(eps / 2), cap, f"star({base.label})")


def minus_entropy(regime) -> EntropyEvaluator:
    """Doubled-entropy transform for the difference class: 2 H(eps/2)."""
    base = as_evaluator(regime)
    return EntropyEvaluator(lambda eps: 2.0 * base(eps / 2), 2 * base.cap, f"minus({base.label})")


def subfamily_entropy(source) -> EntropyEvaluator:
    """Bound for any sub-class: H(eps/2)."""
    base = as_evaluator(source)
    return EntropyEvaluator(lambda eps: base(eps / 2), 2 * base.cap, f"sub({base.label})")


def constant_entropy(value: float, cap: float = math.inf) -> EntropyEvaluator:
    """Entropy bounded by a constant, e.g. log m for a family of m functions."""
    return EntropyEvaluator(lambda eps: float(value), cap, f"const({value:.6g})")
