"""Command-line entry point ``tsp``.

Commands
--------
kernels
    Closed-form quantities (characteristic exponent, ball exit kernels,
    comparison radius) as a single CSV row or JSON object.
simulate
    Aggregate statistics of one exit batch from a scenario's domain.
estimate
    Mean exit time from a scenario's domain as an estimate row.
verify
    Run a scenario's experiment and print the full report.
run
    Run a scenario's experiment, write the report to a file, and print
    one summary line per check.

Global flags (accepted before or after the command): ``--seed`` (unsigned
64-bit), ``--threads``, ``--out``, ``--format {csv,json}``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

import numpy as np

from ..errors import TruncStableError
from ..estimators import mean_exit_time
from ..kernels import (
    char_exponent_psi,
    compute_r0,
    stable_green_ball,
    stable_poisson_ball,
)
from ..params import ProcessParams
from ..simulator import simulate_exit_batch
from .experiments import run_experiment
from .scenario import load_scenario

__all__ = ["main"]

_U64_MAX = 2**64 - 1


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value <= _U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _point(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            "expected comma-separated floats, e.g. 0.1,0.2"
        ) from exc


def _add_global_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=_u64,
        default=argparse.SUPPRESS,
        help="base random seed, unsigned 64-bit (default 0)",
    )
    parser.add_argument(
        "--threads",
        type=_positive_int,
        default=argparse.SUPPRESS,
        help="worker thread cap (clamped to the available pool)",
    )
    parser.add_argument(
        "--out",
        default=argparse.SUPPRESS,
        help="write output to this path instead of stdout",
    )
    parser.add_argument(
        "--format",
        dest="fmt",
        choices=("csv", "json"),
        default=argparse.SUPPRESS,
        help="output format (default csv for kernels/simulate/estimate, json for reports)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsp",
        description="Simulation and numerical verification toolkit for "
        "truncated symmetric stable processes.",
    )
    _add_global_options(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    kern = sub.add_parser("kernels", help="evaluate closed-form kernel quantities")
    _add_global_options(kern)
    kern.add_argument(
        "which", choices=("psi", "poisson", "green", "r0"), help="quantity to evaluate"
    )
    kern.add_argument("--d", type=_positive_int, default=2, help="dimension (default 2)")
    kern.add_argument("--alpha", type=float, default=1.0, help="stability index (default 1)")
    kern.add_argument("--xi", type=float, help="frequency magnitude (psi)")
    kern.add_argument("--radius", type=float, help="ball radius (poisson/green)")
    kern.add_argument("--x", type=_point, help="source point, comma-separated")
    kern.add_argument("--y", type=_point, help="target point, comma-separated")

    for name, help_text in (
        ("simulate", "simulate one exit batch and print aggregates"),
        ("estimate", "estimate the mean exit time from a start point"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_global_options(p)
        p.add_argument("scenario", help="path to a scenario JSON file")
        p.add_argument(
            "--start", type=_point, help="start point (default: scenario-specific)"
        )
        p.add_argument(
            "--paths", type=_positive_int, help="path count override (default: estimate.n)"
        )

    for name, help_text in (
        ("verify", "run a scenario and print the report"),
        ("run", "run a scenario, write the report file, print a summary"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_global_options(p)
        p.add_argument("scenario", help="path to a scenario JSON file")

    return parser


def _default_start(scenario) -> np.ndarray:
    from ..domains import bounding_ball, contains

    center, radius = bounding_ball(scenario.domain)
    if contains(scenario.domain, center):
        return np.asarray(center, dtype=float)
    raise TruncStableError(
        "the domain's bounding-ball center is not interior; pass --start"
    )


def _emit(rows: List[dict], fmt: str, out: Optional[str]) -> None:
    if fmt == "json":
        text = json.dumps(rows if len(rows) != 1 else rows[0], indent=2, sort_keys=True)
        text += "\n"
    else:
        cols = list(rows[0])
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(_csv_cell(row[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cmd_kernels(ns, fmt: str, out: Optional[str]) -> int:
    params = ProcessParams(ns.d, ns.alpha)
    row: dict = {"quantity": ns.which, "d": ns.d, "alpha": float(ns.alpha)}
    if ns.which == "psi":
        if ns.xi is None:
            raise TruncStableError("kernels psi requires --xi")
        kv = char_exponent_psi(params, abs(ns.xi))
        row.update(xi=float(ns.xi), value=kv.value, est_error=kv.est_error)
    elif ns.which == "r0":
        row.update(value=compute_r0(params))
    else:
        if ns.radius is None or ns.x is None or ns.y is None:
            raise TruncStableError(f"kernels {ns.which} requires --radius, --x, --y")
        center = np.zeros(ns.d)
        if ns.which == "poisson":
            value = stable_poisson_ball(params, center, ns.radius, ns.x, ns.y)
            row.update(radius=float(ns.radius), value=float(value), est_error=0.0)
        else:
            kv = stable_green_ball(params, center, ns.radius, ns.x, ns.y)
            row.update(radius=float(ns.radius), value=kv.value, est_error=kv.est_error)
    _emit([row], fmt, out)
    return 0


def _cmd_simulate(ns, seed: int, fmt: str, out: Optional[str]) -> int:
    scenario = load_scenario(ns.scenario)
    start = ns.start if ns.start is not None else _default_start(scenario)
    n = ns.paths or scenario.n
    batch = simulate_exit_batch(
        scenario.params, scenario.domain, start, scenario.sim_config(seed), n
    )
    kept = ~batch.censored
    pts = batch.positions[kept]
    disp = np.linalg.norm(pts - start, axis=1) if pts.size else np.empty(0)
    row = {
        "scenario": scenario.raw["name"],
        "paths": int(n),
        "kept": int(kept.sum()),
        "censored_fraction": float((~kept).mean()),
        "mean_exit_time": float(batch.times[kept].mean()) if kept.any() else float("nan"),
        "mean_displacement": float(disp.mean()) if disp.size else float("nan"),
        "jump_exit_fraction": float(batch.by_jump[kept].mean()) if kept.any() else float("nan"),
        "seed": int(seed),
    }
    _emit([row], fmt, out)
    return 0


def _cmd_estimate(ns, seed: int, fmt: str, out: Optional[str]) -> int:
    scenario = load_scenario(ns.scenario)
    start = ns.start if ns.start is not None else _default_start(scenario)
    n = ns.paths or scenario.n
    est = mean_exit_time(
        scenario.params, scenario.domain, start, n, scenario.sim_config(seed)
    )
    row = {
        "scenario": scenario.raw["name"],
        "quantity": "mean_exit_time",
        "mean": est.mean,
        "stderr": est.stderr,
        "n": est.n,
        "seed": est.seed,
        "censored_fraction": est.censored_fraction,
    }
    _emit([row], fmt, out)
    return 0


def _cmd_report(ns, seed: int, fmt: str, out: Optional[str], write_file: bool) -> int:
    scenario = load_scenario(ns.scenario)
    report = run_experiment(scenario, seed)
    if write_file:
        path = out or f"{scenario.raw['name']}-report.{fmt}"
        report.write(path, fmt)
        for line in report.summary_lines():
            print(line)
        verdict = "all checks passed" if report.all_passed() else "CHECK FAILURES"
        print(f"{verdict}; report written to {path}")
    else:
        if out:
            report.write(out, fmt)
        else:
            sys.stdout.write(report.render(fmt))
    return 0 if report.all_passed() else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    seed = getattr(ns, "seed", 0)
    threads = getattr(ns, "threads", None)
    out = getattr(ns, "out", None)
    fmt = getattr(ns, "fmt", None)
    if threads is not None:
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    try:
        if ns.command == "kernels":
            return _cmd_kernels(ns, fmt or "csv", out)
        if ns.command == "simulate":
            return _cmd_simulate(ns, seed, fmt or "csv", out)
        if ns.command == "estimate":
            return _cmd_estimate(ns, seed, fmt or "csv", out)
        if ns.command == "verify":
            return _cmd_report(ns, seed, fmt or "json", out, write_file=False)
        if ns.command == "run":
            return _cmd_report(ns, seed, fmt or "json", out, write_file=True)
        parser.error(f"unknown command {ns.command!r}")
    except TruncStableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
