"""INI-style run configuration with strict validation.

Grids use ``log:lo:hi:k`` (log-spaced) or ``lin:lo:hi:k``, or a comma list.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from radbound.family_lab import family_from_config

COMMANDS = ("sample", "cover", "rc", "bound", "compare", "fixpoint", "certify", "experiment", "selftest")


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def parse_grid(text):
    text = str(text).strip()
    if text.startswith(("log:", "lin:")):
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"grid {text!r} must look like log:lo:hi:k")
        kind, lo, hi, k = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
        if k < 1:
            raise ValueError("grid needs at least one point")
        if kind == "log":
            if lo <= 0 or hi <= 0:
                raise ValueError("log grid endpoints must be positive")
            grid = np.geomspace(lo, hi, k)
        else:
            grid = np.linspace(lo, hi, k)
        return [_snap(float(x)) for x in grid]
    values = [float(x) for x in text.split(",") if x.strip()]
    if not values:
        raise ValueError("grid is empty")
    return values


def _snap(x):
    """Round values within 1e-9 relative of an integer (log grids over sample sizes)."""
    r = round(x)
    return float(r) if r != 0 and abs(x - r) <= 1e-9 * abs(r) else x


def _u64(text):
    value = int(text, 0) if isinstance(text, str) else int(text)
    if not 0 <= value < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return value


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    return parse


_BOUND_KEYS = {"name": str, "kind": _choice("logpoly", "polylog", "poly"), "d": float, "p": float, "gamma": float,
               "scale": float, "b": float, "n": float, "N": int, "cmode": str, "branch": int}

SCHEMA = {
    "run": {"seed": _u64, "threads": int, "out": str},
    "family": None,  # validated by family_from_config
    "sample": {"n": int, "dim": int, "seed": _u64},
    "grid": {"r": parse_grid, "eps": parse_grid, "n": parse_grid},
    "rc": {"mode": _choice("exact", "monte-carlo", "population"), "draws": int, "outer_draws": int,
           "ghost_n": int},
    "cover": {"q": float, "mode": _choice("exact", "greedy", "auto")},
    "bound": _BOUND_KEYS,
    "baseline": _BOUND_KEYS,
    "compare": {"check": _choice("none", "subroot", "below")},
    "fixpoint": {"scale": float, "r_max": float, "tolerance": float},
    "certificate": {"kind": _choice("logpoly", "polylog"), "B": float, "K": float, "delta": float,
                    "range_width": float, "lipschitz": float, "b": float, "d": float, "p": float,
                    "gamma": float, "scale": float, "cmode": str},
    "experiment": {"m": int, "b": float, "trials": int, "delta": float, "noise": float, "preset_seed": _u64,
                   "cmode": str, "ghost_n": int},
    "selftest": {"level": _choice("quick", "full")},
}

REQUIRED = {
    "sample": [("sample", "n")],
    "cover": [("family", "variant"), ("sample", "n"), ("grid", "eps")],
    "rc": [("family", "variant"), ("sample", "n"), ("grid", "r")],
    "bound": [("bound", "name"), ("grid", "r")],
    "compare": [("bound", "name"), ("baseline", "name"), ("grid", "r")],
    "fixpoint": [("bound", "name")],
    "certify": [("certificate", "kind"), ("grid", "n")],
    "experiment": [("grid", "n")],
    "selftest": [],
}


@dataclass
class RunConfig:
    command: str
    seed: int
    sections: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def threads(self):
        return self.sections.get("run", {}).get("threads", 1)

    @property
    def out(self):
        return self.sections.get("run", {}).get("out", "radbound-out")

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def section(self, name):
        return dict(self.sections.get(name, {}))

    def config_hash(self):
        blob = json.dumps({"command": self.command, "sections": self.raw}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(text, command="selftest", strict=True, seed_override=None) -> RunConfig:
    """Parse and validate configuration text for ``command``.

    Unknown sections or keys are errors when ``strict``; otherwise they
    are dropped and reported in ``RunConfig.warnings``.
    """
    if command not in COMMANDS:
        raise ConfigError([f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}"])
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text or "")
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}".replace("\n", " ")]) from None
    problems, warnings = [], []
    raw, typed = {}, {}
    for name in parser.sections():
        if name not in SCHEMA:
            (problems if strict else warnings).append(f"unknown section [{name}]")
            continue
        items = dict(parser.items(name))
        schema = SCHEMA[name]
        raw[name] = {}
        typed[name] = {}
        for key, value in items.items():
            raw[name][key] = value
            if schema is None:
                typed[name][key] = value
                continue
            if key not in schema:
                (problems if strict else warnings).append(f"unknown key {key!r} in [{name}]")
                del raw[name][key]
                continue
            try:
                typed[name][key] = schema[key](value)
            except (TypeError, ValueError) as exc:
                problems.append(f"[{name}] {key} = {value!r}: {exc}")
    if seed_override is not None:
        typed.setdefault("run", {})["seed"] = _u64(seed_override)
        raw.setdefault("run", {})["seed"] = str(seed_override)
    required = [("run", "seed")] + REQUIRED[command]
    for section, key in required:
        if key not in raw.get(section, {}):
            problems.append(f"missing required key {key!r} in [{section}]")
    if "family" in typed and "variant" in typed["family"]:
        try:
            typed["family"]["spec"] = family_from_config(typed["family"])
        except (TypeError, ValueError) as exc:
            problems.append(f"[family] {exc}")
    threads = typed.get("run", {}).get("threads", 1)
    if threads < 1:
        problems.append("[run] threads must be >= 1")
    if problems:
        raise ConfigError(problems)
    return RunConfig(command, typed["run"]["seed"], typed, raw, warnings)
