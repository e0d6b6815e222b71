"""Batch front-end: solve, sweep, and verify subcommands.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 verification failure. Result files are deterministic for a fixed config;
wall times and timestamps live only in meta.json / sweep_timing.csv.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    check_cross_method,
    check_continuity_bound,
    check_dirichlet_family,
    check_gradient_estimate,
    check_growth_exponent,
    check_interior_minimum,
    check_lambda_shape,
    check_lambda_star_characterization,
    check_power_supersolution,
    check_radius_monotonicity,
    check_scaling_law,
    check_shift_equivariance,
    check_uniqueness,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    build_rhs,
    build_spec,
    parse_config,
)
from .grid import dump_json, field_to_csv
from .problem import ProblemSpec, make_power_rhs, make_pure_power_rhs
from .solvers import (
    SolverError,
    eikonal_initial_guess,
    solve_discounted,
    solve_ergodic,
)
from .scheme import DiscreteOperator

__all__ = ["main", "run_solve", "run_sweep", "run_verify"]


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_meta(out: Path, wall_s: float, extra: dict | None = None) -> None:
    meta = {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": wall_s,
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    _write(out / "meta.json", dump_json(meta) + "\n")


def _csv(header: list[str], rows: list[list[str]]) -> str:
    return "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n"


def _f(x: float) -> str:
    return format(float(x), ".17g")


# -- solve ------------------------------------------------------------------------


def run_solve(cfg: ExperimentConfig, out_dir: str) -> int:
    out = Path(out_dir)
    spec = build_spec(cfg)
    start = time.perf_counter()
    try:
        sol = solve_ergodic(
            spec,
            method=cfg.numerics.method,
            tol=cfg.numerics.tol,
            max_iter=cfg.numerics.max_iter,
        )
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.trace is not None:
            _write(out / "trace.jsonl", exc.trace.to_jsonl())
        _write_meta(out, time.perf_counter() - start, {"status": "solver_failure"})
        return 2
    wall = time.perf_counter() - start
    doc = {
        "lambda": sol.lam,
        "residual_sup": sol.residual_sup,
        "method": sol.method,
        "boundary_policy": sol.boundary_policy,
        "tolerance": sol.tol,
        "grid": {"m": spec.m, "radius": spec.radius, "h": spec.h},
        "anchor": list(spec.anchor),
        "theta": spec.theta,
        "rhs": spec.rhs.descriptor(),
        "values": sol.phi.values.ravel().tolist(),
    }
    _write(out / "solution.json", dump_json(doc) + "\n")
    _write(out / "solution.csv", field_to_csv(sol.phi))
    _write(out / "trace.jsonl", sol.trace.to_jsonl())
    _write_meta(out, wall, {"status": "ok"})
    return 0


# -- sweep ------------------------------------------------------------------------


def _sweep_row(cfg: ExperimentConfig, axis: str, value: float) -> dict:
    t0 = time.perf_counter()
    try:
        if axis == "radius":
            spec = replace(build_spec(cfg), radius=float(value))
            sol = solve_ergodic(
                spec, method=cfg.numerics.method, tol=cfg.numerics.tol,
                max_iter=cfg.numerics.max_iter,
            )
            lam, res = sol.lam, sol.residual_sup
        elif axis == "epsilon":
            spec = build_spec(cfg)
            phi = solve_discounted(spec, float(value), tol=cfg.numerics.tol)
            lam = float(value) * phi.at(spec.anchor_index)
            op = DiscreteOperator(spec)
            res = float(np.max(np.abs(op.residual_values(phi.values, 0.0) + value * phi.values)))
        elif axis == "coeff":
            problem = replace(cfg.problem, coeff=float(value))
            spec = ProblemSpec(
                theta=problem.theta,
                m=problem.dim,
                rhs=build_rhs(problem),
                radius=cfg.numerics.radius,
                h=cfg.numerics.h,
            )
            sol = solve_ergodic(
                spec, method=cfg.numerics.method, tol=cfg.numerics.tol,
                max_iter=cfg.numerics.max_iter,
            )
            lam, res = sol.lam, sol.residual_sup
        else:
            raise ConfigError(f"unknown sweep axis {axis!r}")
        return {
            "value": value, "lambda": lam, "residual": res,
            "status": "ok", "wall_s": time.perf_counter() - t0,
        }
    except SolverError as exc:
        return {
            "value": value, "lambda": None, "residual": None,
            "status": f"failed:{type(exc).__name__}", "wall_s": time.perf_counter() - t0,
        }


def run_sweep(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> int:
    out = Path(out_dir)
    axis = cfg.sweep.axis
    values = list(cfg.sweep.values)
    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda v: _sweep_row(cfg, axis, v), values))
    else:
        rows = [_sweep_row(cfg, axis, v) for v in values]

    header = [axis, "lambda", "residual_sup", "status"]
    body = [
        [_f(r["value"]),
         _f(r["lambda"]) if r["lambda"] is not None else "",
         _f(r["residual"]) if r["residual"] is not None else "",
         r["status"]]
        for r in rows
    ]
    _write(out / "sweep.csv", _csv(header, body))
    timing = [[_f(r["value"]), _f(r["wall_s"])] for r in rows]
    _write(out / "sweep_timing.csv", _csv([axis, "wall_time_s"], timing))
    _write_meta(out, time.perf_counter() - start, {"axis": axis, "n_rows": len(rows)})
    ok = all(r["status"] == "ok" for r in rows)
    if not ok:
        failed = [r for r in rows if r["status"] != "ok"]
        print(f"sweep: {len(failed)}/{len(rows)} rows failed", file=sys.stderr)
    return 0 if ok else 2


# -- verify -----------------------------------------------------------------------


def _run_one_check(name: str, cfg: ExperimentConfig):
    """Returns (verdicts, plot tables as {filename: (header, rows)})."""
    v = cfg.verify
    p = cfg.problem
    n = cfg.numerics
    spec = build_spec(cfg)
    plots: dict[str, tuple[list[str], list[list[str]]]] = {}

    if name == "shift_equivariance":
        rep = check_shift_equivariance(spec, c=1.0, tol=v.tol, solver_tol=n.tol)
        return [rep], plots

    if name == "scaling_law":
        rep = check_scaling_law(
            p.theta, p.alpha, v.c, m=p.dim, radii=v.radii, h=n.h,
            tol_rel=max(v.tol, 0.01), tol=n.tol,
        )
        return [rep], plots

    if name == "lambda_shape":
        f1 = make_power_rhs(p.coeff, p.alpha, p.shift)
        f2 = make_pure_power_rhs(v.coeff2, v.alpha2, v.shift2)
        reps = check_lambda_shape(
            f1, f2, list(v.t_grid), p.theta, m=p.dim, radii=v.radii, h=n.h,
            tol=v.tol, solver_tol=n.tol,
        )
        return reps, plots

    if name == "growth_exponent":
        rep, fit, sol = check_growth_exponent(p.theta, p.alpha, m=p.dim, tol=n.tol)
        rr = sol.phi.grid.radii().ravel()
        shifted = (sol.phi.values - sol.phi.values.min() + 1.0).ravel()
        mask = rr > 0
        rows = [[_f(r), _f(val)] for r, val in zip(rr[mask], shifted[mask])]
        plots["growth_loglog.csv"] = (["abs_y", "phi_shifted"], rows)
        return [rep], plots

    if name == "continuity_bound":
        f1 = make_power_rhs(p.coeff, p.alpha, p.shift)
        f2 = make_power_rhs(v.coeff2, p.alpha, v.shift2)
        rep = check_continuity_bound(
            f1, f2, p.theta, m=p.dim, radii=v.radii, h=n.h, tol=v.tol, solver_tol=n.tol
        )
        return [rep], plots

    if name == "uniqueness":
        seeds = (cfg.run.seed + 1, cfg.run.seed + 2)
        rep = check_uniqueness(spec, seeds=seeds, solver_tol=n.tol)
        return [rep], plots

    if name == "cross_method":
        rep, lams, march, drows = check_cross_method(
            spec, horizon=v.horizon, eps_list=v.eps, pair_tol=v.tol, solver_tol=n.tol
        )
        plots["parabolic_rate.csv"] = (
            ["t", "rate_min", "rate_mean", "rate_max"],
            [[_f(t), _f(a), _f(b), _f(c)] for t, a, b, c in march.rate_stats],
        )
        plots["discount_path.csv"] = (
            ["epsilon", "lambda"],
            [[_f(r["epsilon"]), _f(r["lambda"])] for r in drows],
        )
        return [rep], plots

    if name == "radius_monotonicity":
        rep, rows = check_radius_monotonicity(
            spec, radii=v.radii, h=n.h, slack=max(v.tol, 0.02), solver_tol=n.tol
        )
        plots["lambda_vs_radius.csv"] = (
            ["radius", "lambda"],
            [[_f(r["radius"]), _f(r["lambda"])] for r in rows],
        )
        return [rep], plots

    if name == "lambda_star_characterization":
        rep, table = check_lambda_star_characterization(spec, tol=0.01, solver_tol=n.tol)
        plots["dirichlet_bisection.csv"] = (
            ["lambda", "solvable"],
            [[_f(r["lambda"]), "1" if r["solvable"] else "0"] for r in table],
        )
        return [rep], plots

    if name == "interior_minimum":
        sol = solve_ergodic(spec, method=n.method, tol=n.tol, max_iter=n.max_iter)
        rep = check_interior_minimum(sol)
        return [rep], plots

    if name == "gradient_estimate":
        rhs = build_rhs(p)
        rep = check_gradient_estimate(
            p.theta, rhs, r_primes=v.r_primes, gap=v.gap, m=p.dim, h=n.h, tol=n.tol
        )
        return [rep], plots

    if name == "power_supersolution":
        sol = solve_ergodic(
            spec, initial_guess=eikonal_initial_guess(spec), tol=n.tol, max_iter=n.max_iter
        )
        rep = check_power_supersolution(sol, q=v.q, r_inner=v.r_inner)
        return [rep], plots

    if name == "dirichlet_family":
        sol = solve_ergodic(
            spec, initial_guess=eikonal_initial_guess(spec), tol=n.tol, max_iter=n.max_iter
        )
        lambdas = list(v.lambdas) if v.lambdas else [
            spec.rhs.min_value(), 0.5 * (spec.rhs.min_value() + sol.lam - 0.1), sol.lam - 0.1
        ]
        rep = check_dirichlet_family(spec, lambdas, sol.lam, tol=n.tol)
        return [rep], plots

    raise ConfigError(f"unknown check {name!r}")


def run_verify(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> int:
    out = Path(out_dir)
    start = time.perf_counter()
    names = list(cfg.verify.checks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda nm: _run_one_check(nm, cfg), names))
    else:
        results = [_run_one_check(nm, cfg) for nm in names]

    verdicts = []
    for (reps, plots), nm in zip(results, names):
        verdicts.extend(reps)
        for fname, (header, rows) in plots.items():
            _write(out / "plots" / fname, _csv(header, rows))

    _write(out / "verdicts.json", dump_json([r.to_dict() for r in verdicts]) + "\n")
    summary_rows = []
    for r in verdicts:
        measured = ";".join(f"{k}={_f(val)}" for k, val in r.measured.items())
        predicted = ";".join(f"{k}={_f(val)}" for k, val in r.predicted.items())
        summary_rows.append(
            [r.name, "pass" if r.passed else "fail", measured, predicted, _f(r.tolerance)]
        )
    _write(
        out / "verdicts.csv",
        _csv(["check", "outcome", "measured", "predicted", "tolerance"], summary_rows),
    )
    _write_meta(out, time.perf_counter() - start, {"n_checks": len(verdicts)})
    failed = [r.name for r in verdicts if not r.passed]
    for r in verdicts:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


# -- entry point --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergodic-hjb",
        description="Solve and verify ergodic problems of viscous Hamilton-Jacobi equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, desc in (
        ("solve", "one state-constraint ergodic solve"),
        ("sweep", "a parameter sweep producing a CSV table"),
        ("verify", "run property checks and aggregate verdicts"),
    ):
        p = sub.add_parser(cmd, help=desc)
        p.add_argument("--config", required=True, help="path to the experiment config")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        p.add_argument("--workers", type=int, default=1, help="concurrent sweep/verify jobs")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
        if cfg.run.mode != args.command:
            raise ConfigError(
                f"config mode {cfg.run.mode!r} does not match subcommand {args.command!r}"
            )
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
        if args.workers < 1:
            raise ConfigError("workers must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out or cfg.out_dir
    try:
        if args.command == "solve":
            return run_solve(cfg, out_dir)
        if args.command == "sweep":
            return run_sweep(cfg, out_dir, workers=args.workers)
        return run_verify(cfg, out_dir, workers=args.workers)
    except (ConfigError, ValueError) as exc:
        # ValueError from a check means its parameters are inconsistent with
        # the problem instance, which is a configuration problem
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
