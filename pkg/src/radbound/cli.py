"""Command-line front end: ``radbound <command> --config run.ini``.

Exit status: 0 success, 1 a checked inequality failed, 2 invalid config.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys

import numpy as np

from radbound import __version__, certify, chain_bounds as cb, selftest
from radbound.config import COMMANDS, ConfigError, RunConfig, parse_config
from radbound.covermetrics import CoverIndex, cover_rows_csv
from radbound.family_lab import SamplePlan, draw_sample, project
from radbound.rademacher_mc import EXACT_MAX_N, estimates_csv, local_rc_empirical, local_rc_population_curve
from radbound.regimes import EntropyRegime

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


class CommandResult:
    def __init__(self):
        self.files = {}
        self.failed = False
        self.messages = []

    def emit(self, name, text):
        self.files[name] = text


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _sample(cfg: RunConfig):
    sec = cfg.section("sample")
    spec = cfg.get("family", "spec")
    dim = sec.get("dim", spec.dim if spec is not None else 1)
    return draw_sample(SamplePlan(n=sec["n"], dim=dim, seed=sec.get("seed", cfg.seed)))


def cmd_sample(cfg, res):
    sample = _sample(cfg)
    header = ["index"] + [f"x{j}" for j in range(sample.dim)]
    res.emit("sample.csv", _csv(header, [[i] + [repr(float(v)) for v in row] for i, row in enumerate(sample.points)]))


def _family_id(spec):
    blob = json.dumps(spec.to_config(), sort_keys=True, default=str)
    return f"{spec.variant}-{hashlib.sha256(blob.encode()).hexdigest()[:8]}"


def cmd_cover(cfg, res):
    spec = cfg.get("family", "spec")
    pf = project(spec, _sample(cfg))
    q = cfg.get("cover", "q", 2.0)
    mode = cfg.get("cover", "mode", "auto")
    index = CoverIndex(pf, q)
    fid = _family_id(spec)
    rows = []
    for eps in cfg.get("grid", "eps"):
        count = index.count(eps, mode)
        rows.append((fid, eps, q, count.kind, count.value))
        rows.append((fid, eps, q, "packing-lower", len(index.packing(eps))))
    res.emit("covers.csv", cover_rows_csv(rows))


def cmd_rc(cfg, res):
    spec = cfg.get("family", "spec")
    sec = cfg.section("rc")
    n = cfg.get("sample", "n")
    mode = sec.get("mode", "exact" if n <= EXACT_MAX_N else "monte-carlo")
    draws = sec.get("draws", 2000)
    grid = cfg.get("grid", "r")
    if mode == "population":
        ests = local_rc_population_curve(spec, grid, n, sec.get("ghost_n"), sec.get("outer_draws", 200), draws,
                                         cfg.seed, cfg.threads)
        records = [(cfg.seed, n, spec.size, r, "population", e) for r, e in zip(grid, ests)]
    else:
        pf = project(spec, _sample(cfg))
        records = [(cfg.seed, n, pf.m, r, "empirical", local_rc_empirical(pf, r, mode, draws, cfg.seed))
                   for r in grid]
    res.emit("rc.csv", estimates_csv(records))


def _bound(cfg, section):
    params = cfg.section(section)
    name = params.pop("name")
    func, q = cb.bound_function(name, **params)
    q = {k: (str(v) if isinstance(v, cb.ConstantMode) else v) for k, v in q.items()}
    return name, func, q


def _curve(cfg, section):
    name, func, q = _bound(cfg, section)
    return cb.make_curve(func, cfg.get("grid", "r"), name=name, **q)


def cmd_bound(cfg, res):
    res.emit("bound.csv", cb.curves_csv([_curve(cfg, "bound")]))


def _diag_rows(curves):
    rows = []
    for curve in curves:
        d = cb.curve_diagnostics(curve)
        rows.append([curve.meta["name"], curve.params_hash(), int(d.monotone_nondecreasing), int(d.subroot),
                     d.r_to_zero_limit_kind])
    return rows


def cmd_compare(cfg, res):
    ours, base = _curve(cfg, "bound"), _curve(cfg, "baseline")
    res.emit("curves.csv", cb.curves_csv([ours, base]))
    res.emit("compare.csv", cb.comparison_csv(ours.r, ours.values, base.values))
    res.emit("diagnostics.csv", _csv(("bound_name", "params_hash", "monotone_nondecreasing", "subroot",
                                      "r_to_zero_limit_kind"), _diag_rows([ours, base])))
    check = cfg.get("compare", "check", "subroot")
    if check == "subroot":
        d = cb.curve_diagnostics(ours)
        res.failed = not (d.subroot and d.monotone_nondecreasing)
    elif check == "below":
        res.failed = bool(np.any(ours.values > base.values))


def cmd_fixpoint(cfg, res):
    name, func, q = _bound(cfg, "bound")
    scale = cfg.get("fixpoint", "scale", 1.0)
    r_max = cfg.get("fixpoint", "r_max", (2 * q["b"]) ** 2)
    probe = certify.SubRootProbe(lambda r: scale * func(r), r_max=r_max)
    report = certify.subroot_check(probe)
    rows = [[name, repr(scale), int(report.passed)]]
    if report.passed:
        fp = certify.fixed_point(probe, cfg.get("fixpoint", "tolerance", certify.DEFAULT_TOL), check=False)
        rows[0] += [repr(fp.r_star), repr(fp.residual), fp.iterations]
    else:
        rows[0] += ["", "", ""]
        res.failed = True
    res.emit("fixpoint.csv", _csv(("bound_name", "scale", "subroot", "r_star", "residual", "iterations"), rows))


def _cert_params(cfg):
    sec = cfg.section("certificate")
    kind = sec["kind"]
    if kind == "logpoly":
        regime = EntropyRegime.logpoly(sec.get("d", 1.0), sec.get("p", 1.0), sec.get("gamma", 1.0))
    else:
        regime = EntropyRegime.polylog(sec.get("gamma", 1.0), sec.get("p", 1.0), sec.get("scale", 2.0))
    params = certify.CertificateParams(B=sec.get("B", 1.0), K=sec.get("K", 2.0), delta=sec.get("delta", 0.05),
                                       range_width=sec.get("range_width", 1.0), lipschitz=sec.get("lipschitz", 1.0),
                                       regime=regime, b=sec.get("b", 1.0))
    return kind, params, sec.get("cmode", "unit")


def cmd_certify(cfg, res):
    kind, params, cmode = _cert_params(cfg)
    build = certify.certificate_logpoly if kind == "logpoly" else certify.certificate_polylog
    certs = [build(params, n, cmode) for n in cfg.get("grid", "n")]
    res.emit("certificates.csv", certify.certificates_csv(certs))
    extras = [[repr(float(c.n)), key, repr(val) if isinstance(val, float) else val]
              for c in certs for key, val in sorted(c.extras.items())]
    res.emit("certificate_details.csv", _csv(("n", "key", "value"), extras))


def cmd_experiment(cfg, res):
    sec = cfg.section("experiment")
    preset = certify.finite_erm_preset(m=sec.get("m", 32), b=sec.get("b", 1.0), seed=sec.get("preset_seed", 0),
                                       noise=sec.get("noise"))
    params = preset.params(delta=sec.get("delta", 0.05))
    rows = []
    for n in cfg.get("grid", "n"):
        rep = certify.erm_experiment(preset, int(n), sec.get("trials", 200), params, cfg.seed,
                                     sec.get("cmode", "traced"), sec.get("ghost_n", certify.GHOST_N), cfg.threads)
        res.emit(f"experiment_n{int(n)}.csv", certify.experiment_csv(rep.trials))
        ok = rep.coverage >= 1 - rep.delta
        res.failed |= not ok
        rows.append([int(n), len(rep.trials), repr(rep.coverage), repr(rep.certificate.total), int(ok)])
    res.emit("coverage.csv", _csv(("n", "trials", "coverage", "certificate", "passed"), rows))


def cmd_selftest(cfg, res):
    results = selftest.run_selftest(cfg.seed, cfg.threads, cfg.get("selftest", "level", "quick"))
    res.emit("selftest.csv", selftest.selftest_csv(results))
    res.failed = not all(r.passed for r in results)
    res.messages += [f"{r.name}: {'pass' if r.passed else 'FAIL'} ({r.violations}/{r.cases} violations)"
                     for r in results]


HANDLERS = {
    "sample": cmd_sample, "cover": cmd_cover, "rc": cmd_rc, "bound": cmd_bound, "compare": cmd_compare,
    "fixpoint": cmd_fixpoint, "certify": cmd_certify, "experiment": cmd_experiment, "selftest": cmd_selftest,
}


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def run(command, cfg: RunConfig, out=None):
    """Execute ``command``; write CSVs and a manifest line under ``out``. Returns (status, CommandResult)."""
    out = out or cfg.out
    start = _now()
    res = CommandResult()
    try:
        HANDLERS[command](cfg, res)
    except (cb.BoundDomainError, ValueError) as exc:
        res.messages.append(f"error: {exc}")
        return EXIT_CONFIG, res
    os.makedirs(out, exist_ok=True)
    for name, text in res.files.items():
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    status = EXIT_CHECK_FAILED if res.failed else EXIT_OK
    record = {"tool": "radbound", "version": __version__, "command": command, "config_hash": cfg.config_hash(),
              "seed": cfg.seed, "threads": cfg.threads, "start": start, "end": _now(),
              "files": sorted(res.files), "status": status}
    with open(os.path.join(out, "manifest.jsonl"), "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return status, res


def build_parser():
    parser = argparse.ArgumentParser(prog="radbound", description="Local Rademacher complexity bounds and checks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH", help="INI configuration file")
    parser.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides [run] out)")
    parser.add_argument("--threads", type=int, help="worker threads (overrides [run] threads)")
    parser.add_argument("--strict", action="store_true", help="reject unknown sections and keys")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"radbound: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = parse_config(text, args.command, strict=args.strict, seed_override=args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError(["--threads must be >= 1"])
            cfg.sections.setdefault("run", {})["threads"] = args.threads
    except ConfigError as exc:
        print(f"radbound: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for warning in cfg.warnings:
        print(f"radbound: warning: {warning} (ignored)", file=sys.stderr)
    status, res = run(args.command, cfg, args.out)
    for line in res.messages:
        print(line, file=sys.stderr if line.startswith("error") else sys.stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
