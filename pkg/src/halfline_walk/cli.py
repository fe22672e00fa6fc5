"""Command line: ``halfline-walk <command> --config <path> [--seed N] [--out DIR] [--threads N]``.

Exit codes: 0 success, 1 the walk violates the standing assumptions (or a
verification criterion failed), 2 numeric failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import bd_profile, default_grid, exponent_report, loglog_fit
from .config import RunConfig, build_distribution, dump_config, load_config
from .errors import (
    ConfigError,
    DistributionError,
    DivergentMoment,
    HalflineWalkError,
    InsufficientData,
    OutOfRange,
)
from .lattice_walk import validate
from .montecarlo import SimConfig, simulate_geometric, simulate_ladder, simulate_survival
from .report import emit_ratio_csv, emit_survival_csv, fmt, write_summary, written_slope
from .wiener_hopf import ladder_transform, line_survival, ratio_curve, survival_factors
from .quadrature import QuadratureSpec

COMMANDS = ("validate", "analyze", "simulate", "geometric", "wiener-hopf", "ladder", "verify")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2, 3


class AssumptionViolated(HalflineWalkError):
    """The walk fails normalization, centering, aperiodicity or the moment conditions."""


def _versions() -> dict:
    import numba
    import scipy

    return {"halfline_walk": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def _write_table(path: Path, header, rows) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _checked(cfg: RunConfig):
    dist = build_distribution(cfg.distribution)
    rep = validate(dist)
    if not rep.ok:
        raise AssumptionViolated("; ".join(rep.messages))
    return dist, rep


# ----------------------------------------------------------------- commands

def cmd_validate(cfg, dist, out, threads):
    rep = validate(dist)
    res = {"ok": rep.ok, "normalized": rep.normalized, "mean_zero_x2": rep.mean_zero_x2,
           "aperiodic": rep.aperiodic, "moments_finite": rep.moments_finite,
           "elementary_divisors": list(rep.elementary_divisors), "messages": list(rep.messages)}
    if not rep.ok:
        return res, AssumptionViolated("; ".join(rep.messages))
    return res, None


def cmd_analyze(cfg, dist, out, threads):
    a = cfg.analyze
    grid = default_grid(a.window, a.points)
    rep = exponent_report(dist, grid, a.source)
    prof = bd_profile(dist, grid)
    _write_table(out / "profile.csv", ("theta1", "b", "d"), zip(prof.grid, prof.b_prof, prof.d_prof))
    return {"beta": rep.beta, "survival_exponent": rep.survival_exponent, "source": rep.source,
            "fit": asdict(rep.fit) if rep.fit is not None else None}, None


def cmd_simulate(cfg, dist, out, threads):
    s = cfg.simulate
    sc = SimConfig(n_paths=s.n_paths, horizon=s.horizon, seed=cfg.seed, target=s.target,
                   checkpoints=None if s.checkpoints is None else tuple(s.checkpoints),
                   streams=s.streams, threads=threads)
    curve = simulate_survival(dist, sc)
    emit_survival_csv(curve, out / "survival.csv")
    window = s.fit_window if s.fit_window is not None else (1.0, s.horizon / 10.0)
    try:
        slope, intercept, err = loglog_fit(curve.n_values, curve.p_hat, window)
        fit = {"window": list(window), "slope": slope, "intercept": intercept, "stderr": err}
    except InsufficientData as exc:
        if s.fit_window is not None:
            raise
        fit = {"window": list(window), "slope": None, "reason": str(exc)}
    return {"n_paths": curve.n_paths, "target": curve.target, "fit": fit,
            "p_hat_final": curve.p_hat[-1] if curve.p_hat else None}, None


def cmd_geometric(cfg, dist, out, threads):
    g = cfg.geometric
    rows = []
    res = []
    for i, lam in enumerate(g.lambdas):
        for j, tg in enumerate(g.targets):
            seed = cfg.seed + 1000 * i + j
            est = simulate_geometric(dist, lam, SimConfig(n_paths=g.n_paths, horizon=g.horizon,
                                                          seed=seed, target=tg, streams=g.streams,
                                                          threads=threads), method=g.method)
            rows.append((lam, tg, seed, est.p_hat, est.ci_half_width, est.origin_fraction,
                         est.n_paths))
            res.append({"lambda": lam, "target": tg, "seed": seed, "p_hat": est.p_hat,
                        "ci99": est.ci_half_width, "origin_fraction": est.origin_fraction})
    _write_table(out / "geometric.csv",
                 ("lambda", "target", "seed", "p_hat", "ci99", "origin_fraction", "n_paths"), rows)
    return {"method": g.method, "estimates": res}, None


def cmd_wiener_hopf(cfg, dist, out, threads):
    w = cfg.wiener_hopf
    quad = QuadratureSpec(tol=w.tol, max_panels=w.max_panels)
    ratio = ratio_curve(dist, w.lambdas, s0=w.s0, L=w.L, quad=quad, method=w.method, n_max=w.n_max)
    emit_ratio_csv(ratio, out / "ratio.csv")
    facs = [survival_factors(dist, lam, w.k_max, w.l_max, quad) for lam in w.lambdas]
    _write_table(out / "factors.csv",
                 ("lambda", "c_lambda", "f_inf", "f_zero", "p_v_minus", "p_v_plus", "truncation_bound"),
                 [(f.lam, f.c_lam, f.f_inf, f.f_zero, f.p_v_minus, f.p_v_plus, f.truncation_bound)
                  for f in facs])
    x = np.log(1.0 - np.asarray(w.lambdas, dtype=float))
    pv_slope = float(np.polyfit(x, np.log([f.p_v_minus for f in facs]), 1)[0]) if len(facs) > 1 else None
    return {"method": ratio.method, "slope": written_slope(ratio),
            "p_v_minus_slope": pv_slope}, None


def cmd_ladder(cfg, dist, out, threads):
    b = cfg.ladder
    vals = {l: ladder_transform(dist, b.k, l, b.lam) for l in b.l_values}
    mc = {}
    if b.mc_samples > 0:
        if b.k != 1:
            raise OutOfRange("ladder Monte Carlo samples the first return only (k = 1)")
        smp = simulate_ladder(dist, SimConfig(n_paths=b.mc_samples, horizon=b.horizon, seed=cfg.seed,
                                              threads=threads))
        mc = {l: smp.weighted_mean(b.lam, l) for l in b.l_values}
    rows = [(l, vals[l], *(mc[l] if l in mc else ("", ""))) for l in b.l_values]
    _write_table(out / "ladder.csv", ("l", "value", "mc_mean", "mc_se"), rows)
    res = {"lambda": b.lam, "k": b.k, "values": {str(l): v for l, v in vals.items()},
           "line_survival": line_survival(dist, b.lam)}
    if mc:
        res["z"] = {str(l): abs(mc[l][0] - vals[l]) / mc[l][1] for l in b.l_values}
    return res, None


def cmd_verify(cfg, dist, out, threads):
    from .verify import verify_from_config

    rows = verify_from_config(cfg, threads)
    for r in rows:
        print(r.line(), flush=True)
    _write_table(out / "verify.csv", ("id", "name", "target", "measured", "tolerance", "passed", "reduced"),
                 [(r.id, r.name, r.target, r.measured, r.tolerance, r.passed, r.reduced) for r in rows])
    res = {"rows": [{k: v for k, v in asdict(r).items() if k != "details"} for r in rows],
           "all_passed": all(r.passed for r in rows)}
    failed = [r.id for r in rows if not r.passed]
    return res, (AssumptionViolated(f"criteria failed: {failed}") if failed else None)


HANDLERS = {"validate": cmd_validate, "analyze": cmd_analyze, "simulate": cmd_simulate,
            "geometric": cmd_geometric, "wiener-hopf": cmd_wiener_hopf, "ladder": cmd_ladder,
            "verify": cmd_verify}


def exit_code(exc: BaseException) -> int:
    """The process exit code for a failure; every failure maps to exactly one of 1, 2, 3."""
    if isinstance(exc, (AssumptionViolated, DivergentMoment)):
        return EXIT_INVALID
    if isinstance(exc, (ConfigError, DistributionError, OutOfRange, OSError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def run(config_path, command: str, seed: int | None = None, out: str | None = None,
        threads: int | None = None) -> int:
    """Dispatch ``command`` and write ``summary.json`` plus its CSV tables."""
    if command not in HANDLERS:
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(config_path)
        updates = {k: v for k, v in (("seed", seed), ("output_dir", out)) if v is not None}
        if updates:
            cfg = cfg.model_copy(update=updates)
        threads = threads if threads is not None else cfg.threads
        outdir = Path(cfg.output_dir)
        if command == "validate":
            dist = build_distribution(cfg.distribution)
        else:
            dist, _ = _checked(cfg)
        result, failure = HANDLERS[command](cfg, dist, outdir, threads)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an exit code
        if not isinstance(exc, (HalflineWalkError, OSError)):
            raise
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    summary = {"command": command, "config": _config_echo(cfg), "seed": cfg.seed,
               "versions": _versions(), "result": result,
               "status": "ok" if failure is None else "failed"}
    try:
        write_summary(summary, outdir / "summary.json")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if failure is not None:
        print(f"error: {failure}", file=sys.stderr)
        return exit_code(failure)
    return EXIT_OK


def _config_echo(cfg: RunConfig):
    return json.loads(dump_config(cfg))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are configuration errors, not numeric failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    p = _Parser(prog="halfline-walk", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads; falls back to HALFLINE_WALK_THREADS")
    args = p.parse_args(argv)
    return run(args.config, args.command, args.seed, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "run", "exit_code", "COMMANDS", "AssumptionViolated"]
