"""Command-line interface.

Exit codes: 0 success / Exists, 1 usage or configuration error, 2 NoSolution,
3 Inconclusive (or exponents outside every classified region), 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, asymptotics, config, criteria, frontsim, oracle, profile, shooting
from .exceptions import (
    BracketFailure,
    ClassificationConflict,
    ConfigError,
    DivergentIntegral,
    DomainError,
    InstabilityDetected,
    NonPropagation,
    OutOfTheoremScope,
    PreconditionViolation,
    QuadratureFailure,
    SingularIntegrand,
    StepFailure,
    TwfrontError,
)
from .model import Problem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2
EXIT_INCONCLUSIVE = 3
EXIT_NUMERICAL = 4

NUMERICAL_ERRORS = (
    StepFailure, BracketFailure, QuadratureFailure, SingularIntegrand, ClassificationConflict,
    InstabilityDetected, NonPropagation, FloatingPointError, OverflowError,
)

log = logging.getLogger("twfront")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route it through our exit-code table instead
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunManifest:
    subcommand: str
    config: Optional[dict]
    version: str = __version__
    tolerances: dict = field(default_factory=dict)
    duration_s: float = 0.0
    started_at: str = ""
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def to_dict(self) -> dict:
        self.duration_s = round(time.perf_counter() - self._t0, 6)
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "version": self.version,
            "tolerances": self.tolerances,
            "duration_s": self.duration_s,
            "started_at": self.started_at,
        }


# ---------------------------------------------------------------------------
# helpers


def _json(obj) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        if hasattr(o, "value"):
            return o.value
        return str(o)

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return "nan" if math.isnan(o) else ("+inf" if o > 0 else "-inf")
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    return json.dumps(clean(obj), indent=2, sort_keys=True, default=default)


def _load(args) -> tuple[Problem, dict]:
    if not args.config:
        raise ConfigError("a problem configuration is required", "--config")
    return config.load(args.config)


def _tolerances(args) -> dict:
    return {"tol_c": args.tol_c, "tol_ode": args.tol_ode}


def _emit(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _write_manifest(path: Path, manifest: RunManifest) -> None:
    side = path.with_name(path.name + ".manifest.json")
    side.write_text(_json(manifest.to_dict()) + "\n")


def _write_text(path, text: str) -> None:
    Path(path).write_text(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args, manifest: RunManifest) -> int:
    problem, cfg = _load(args)
    manifest.config = cfg
    rep = criteria.evaluate(problem)
    body = {"report": rep.to_dict()}
    _deliver_report(args, body, manifest)
    return {criteria.Verdict.EXISTS: EXIT_OK, criteria.Verdict.NO_SOLUTION: EXIT_NO_SOLUTION}.get(
        rep.verdict, EXIT_INCONCLUSIVE
    )


def _solve(problem: Problem, args) -> shooting.WaveSpeedResult:
    return shooting.find_c_star(problem, tol_c=args.tol_c, tol_ode=args.tol_ode)


def _y_csv(problem: Problem, wave: shooting.WaveSpeedResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "y", "y_pow_1_over_pconj"])
    for u, y in wave.y_table:
        w.writerow([repr(float(u)), repr(float(y)), repr(float(y) ** (1.0 / problem.p_conj))])
    return buf.getvalue()


def cmd_solve(args, manifest: RunManifest) -> int:
    problem, cfg = _load(args)
    manifest.config = cfg
    wave = _solve(problem, args)
    body = {"solution": wave.to_dict(), "report": wave.report.to_dict()}
    if args.emit_y and wave.outcome is not None:
        _write_text(args.emit_y, _y_csv(problem, wave))
        _write_manifest(Path(args.emit_y), manifest)
    _deliver_report(args, body, manifest)
    return EXIT_OK if wave.found else EXIT_NO_SOLUTION


def cmd_profile(args, manifest: RunManifest) -> int:
    problem, cfg = _load(args)
    manifest.config = cfg
    if not args.xi_step > 0 or not args.xi_max > args.xi_min:
        raise UsageError("--xi-step must be positive and --xi-max must exceed --xi-min")
    wave = _solve(problem, args)
    if not wave.found:
        _deliver_report(args, {"solution": wave.to_dict()}, manifest)
        return EXIT_NO_SOLUTION
    table = profile.build_profile(problem, wave, args.xi_min, args.xi_max, args.xi_step)
    if args.out:
        table.to_csv(args.out)
        _write_manifest(Path(args.out), manifest)
        _emit(args, _json({"profile": table.metadata(), "rows": int(table.xi.size), "out": str(args.out)}))
    elif not args.quiet:
        table.to_csv(sys.stdout)
    return EXIT_OK


def cmd_classify(args, manifest: RunManifest) -> int:
    problem, cfg = _load(args)
    manifest.config = cfg
    d, r = cfg["diffusion"], cfg["reaction"]
    try:
        cls = asymptotics.classify(cfg["p"], d["alpha"], d["beta"], r["gamma"])
    except OutOfTheoremScope as exc:
        _deliver_report(args, {"classification": None, "reason": str(exc)}, manifest)
        return EXIT_INCONCLUSIVE
    h_nonneg = bool(np.all(problem.H(np.linspace(0.0, 1.0, 2001)[1:]) >= 0.0))
    body = {
        "classification": cls.to_dict(),
        "region": cls.region_at_one.value,
        "exponents": {
            "near_zero": asymptotics.tail_exponent_zero(cfg["p"], d["alpha"]),
            "near_one": asymptotics.tail_exponent_one(cfg["p"], d["beta"], r["gamma"]),
        },
        "standing_hypothesis_H_nonnegative": h_nonneg,
    }
    _deliver_report(args, body, manifest)
    return EXIT_OK


def cmd_simulate(args, manifest: RunManifest) -> int:
    problem, cfg = _load(args)
    manifest.config = cfg
    try:
        sim_cfg = frontsim.SimConfig(
            L=args.L, N=args.cells, cfl=args.cfl, t_end=args.t_end,
            gradient_floor=args.gradient_floor, record_stride=args.record_stride,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    try:
        res = frontsim.simulate(problem, sim_cfg)
    except PreconditionViolation as exc:
        _deliver_report(args, {"error": str(exc)}, manifest)
        return EXIT_NO_SOLUTION
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x_front"])
    for t, x in res.series():
        w.writerow([repr(t), repr(x)])
    buf.write(f"# fitted_speed={res.fitted_speed!r} fit_rms={res.fit_rms!r} edge_speed={res.edge_speed!r}\n")
    if args.out:
        _write_text(args.out, buf.getvalue())
        _write_manifest(Path(args.out), manifest)
        _emit(args, _json({"simulation": res.to_dict(), "out": str(args.out)}))
    elif not args.quiet:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# sweep ---------------------------------------------------------------------

SWEEP_COLUMNS = ["axis", "value", "status", "c_star", "xi1_finite", "xi2_finite", "region_at_one", "error"]


def _sweep_problem(cfg: dict, axis: str, value: float) -> Problem:
    cfg = json.loads(json.dumps(cfg))
    if axis == "p":
        cfg["p"] = value
    elif axis == "g0":
        cfg["reaction"]["g0"] = value
    else:
        cfg["convection"]["coeffs"] = [value * c for c in cfg["convection"]["coeffs"]]
    return config.build_problem(cfg)


def _sweep_row(task) -> list:
    cfg, axis, value, tol_c, tol_ode = task
    row = {k: "" for k in SWEEP_COLUMNS}
    row.update(axis=axis, value=repr(float(value)))
    try:
        problem = _sweep_problem(cfg, axis, value)
        wave = shooting.find_c_star(problem, tol_c=tol_c, tol_ode=tol_ode)
        row["status"] = wave.status.value
        if wave.found:
            row["c_star"] = repr(float(wave.c_star))
            tab = profile.tabulate(problem, wave)
            row["xi1_finite"] = str(bool(math.isfinite(tab.xi1))).lower()
            row["xi2_finite"] = str(bool(math.isfinite(tab.xi2))).lower()
        d, r = problem.diffusion, problem.reaction
        try:
            row["region_at_one"] = asymptotics.classify_one(problem.p, d.beta, r.gamma)[1].value
        except OutOfTheoremScope:
            row["region_at_one"] = "out-of-scope"
    except Exception as exc:  # recorded in-row; a sweep never aborts on one point
        row["status"] = row["status"] or "Error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return [row[k] for k in SWEEP_COLUMNS]


def worker_count() -> int:
    raw = os.environ.get("TWFRONT_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"expected a positive integer, got {raw!r}", "TWFRONT_THREADS") from exc
    if n < 1:
        raise ConfigError(f"expected a positive integer, got {raw!r}", "TWFRONT_THREADS")
    return n


def sweep_values(args) -> list[float]:
    if args.values:
        try:
            return [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--values: {exc}") from exc
    if args.range is None:
        raise UsageError("sweep needs --range LO HI (with --steps) or --values v1,v2,...")
    lo, hi = args.range
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    return [float(v) for v in np.linspace(lo, hi, args.steps)] if args.steps > 1 else [float(lo)]


def run_sweep(cfg: dict, axis: str, values: Sequence[float], tol_c: float, tol_ode: float,
              workers: int = 1) -> str:
    tasks = [(cfg, axis, v, tol_c, tol_ode) for v in values]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args, manifest: RunManifest) -> int:
    _, cfg = _load(args)
    manifest.config = cfg
    values = sweep_values(args)
    text = run_sweep(cfg, args.axis, values, args.tol_c, args.tol_ode, worker_count())
    if args.out:
        _write_text(args.out, text)
        _write_manifest(Path(args.out), manifest)
    elif not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args, manifest: RunManifest) -> int:
    reports = oracle.run_all(quick=args.quick)
    for rep in reports:
        _emit(args, json.dumps(rep.to_dict(), sort_keys=True))
    if args.out:
        _write_text(args.out, _json({"reports": [r.to_dict() for r in reports], "manifest": manifest.to_dict()}) + "\n")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_NUMERICAL


def _deliver_report(args, body: dict, manifest: RunManifest) -> None:
    """Structured reports carry their manifest inline; CSV tables get a sidecar instead."""
    text = _json({**body, "manifest": manifest.to_dict()})
    if args.out:
        _write_text(args.out, text + "\n")
    _emit(args, text)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="problem configuration file (YAML or JSON)")
    common.add_argument("--out", help="write the result to this file; CSV tables get a .manifest.json sidecar")
    common.add_argument("--tol-c", type=float, default=shooting.TOL_C, help="bisection tolerance on c")
    common.add_argument("--tol-ode", type=float, default=shooting.TOL_ODE, help="ODE local error tolerance")
    common.add_argument("--quiet", action="store_true", help="suppress output on stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = _Parser(prog="twfront", description="Travelling combustion fronts: existence, speed, profile.")
    parser.add_argument("--version", action="version", version=f"twfront {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub.add_parser("check", parents=[common], help="evaluate the existence/nonexistence criteria")

    p = sub.add_parser("solve", parents=[common], help="compute the wave speed c*")
    p.add_argument("--emit-y", metavar="PATH", help="CSV of u, y, y**(1/p') at the solution")

    p = sub.add_parser("profile", parents=[common], help="tabulate the wave profile u(xi)")
    p.add_argument("--xi-min", type=float, default=-20.0)
    p.add_argument("--xi-max", type=float, default=40.0)
    p.add_argument("--xi-step", type=float, default=1e-2)

    sub.add_parser("classify", parents=[common], help="edge behaviour from the power-law exponents")

    p = sub.add_parser("simulate", parents=[common], help="evolve the PDE and measure the front speed")
    p.add_argument("--L", type=float, default=50.0, help="domain half-width")
    p.add_argument("--cells", type=int, default=4000)
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--gradient-floor", type=float, default=1e-8)
    p.add_argument("--record-stride", type=int, default=50)

    p = sub.add_parser("sweep", parents=[common], help="solve along one parameter axis")
    p.add_argument("--axis", choices=["p", "g0", "convection-scale"], required=True)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--values", help="comma-separated axis values (instead of --range/--steps)")

    p = sub.add_parser("verify", parents=[common], help="run the inequality and constant oracles")
    p.add_argument("--quick", action="store_true", help="smaller sample campaigns")
    return parser


COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "profile": cmd_profile,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    manifest = RunManifest(
        subcommand=args.command, config=None, tolerances=_tolerances(args),
        started_at=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    )
    try:
        code = COMMANDS[args.command](args, manifest)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergentIntegral as exc:
        print(f"error: reaction.gamma / diffusion.beta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutOfTheoremScope as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PreconditionViolation, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TwfrontError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
