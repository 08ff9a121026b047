"""Command-line entry point: single runs, figure sweeps, and checkers.

Exit codes: 0 success, 1 configuration error, 2 divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, driver
from .dynamics import OdeParams, initial_state
from .errors import OdeAccelError
from .integrators import builtin_tableau, estimate_order, load_tableau
from .objectives import benchmark_objective

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2

# Predefined sweeps matching the benchmark figures.  Seeds and iteration
# budgets are pinned so every sweep is reproducible with one command.
_QUAD_MEMBERS = [
    ("gd", dict(method="gd")),
    ("nag", dict(method="nag")),
    ("ode_s1", dict(method="ode", tableau="euler", q=2)),
    ("ode_s2", dict(method="ode", tableau="midpoint", q=2)),
    ("ode_s4", dict(method="ode", tableau="rk4", q=2)),
]

SWEEPS = {
    "quad": dict(objective=("quadratic", 7), n_iters=100_000, members=_QUAD_MEMBERS),
    "composite": dict(objective=("composite", 5), n_iters=100_000, members=_QUAD_MEMBERS),
    "decouple": dict(
        objective=("quadratic", 7),
        n_iters=100_000,
        shared_step_from=("rk4", 2),
        members=[(f"ode_q{q}", dict(method="ode", tableau="rk4", q=q)) for q in (1, 2, 3, 4)],
    ),
    "l4": dict(
        objective=("l4", 11),
        n_iters=1_000_000,
        members=[("nag", dict(method="nag"))]
        + [(f"ode_q{q}", dict(method="ode", tableau="midpoint", q=q)) for q in (2, 4, 6)],
    ),
    "logistic": dict(
        objective=("logistic", 0),
        n_iters=1_000_000,
        members=[("nag", dict(method="nag"))]
        + [(f"ode_q{q}", dict(method="ode", tableau="midpoint", q=q)) for q in (2, 4)],
    ),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def _apply_config_file(args, path):
    """key=value defaults; explicit flags win (only unset options are filled)."""
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise OdeAccelError(f"{path}:{ln}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise OdeAccelError(f"{path}:{ln}: unknown option {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, _coerce(value))
    return args


def _build_parser() -> _Parser:
    parser = _Parser(prog="odeaccel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single optimization run writing a CSV trace")
    run.add_argument("--objective", choices=["quadratic", "l4", "logistic", "composite"])
    run.add_argument("--method", choices=["ode", "gd", "nag"], default="ode")
    run.add_argument("--q", type=int, default=2)
    run.add_argument("--tableau", default="rk4")
    run.add_argument("--tableau-file", default=None)
    run.add_argument("--N", type=int, dest="n_iters", default=100_000)
    step = run.add_mutually_exclusive_group()
    step.add_argument("--h", type=float, default=None, help="fixed step size")
    step.add_argument("--C", type=float, default=None, help="schedule constant: h=C/N^(1/(s+1))")
    step.add_argument("--auto-h", action="store_true", help="search the step size (default)")
    run.add_argument("--seed", type=int, default=7)
    run.add_argument("--dim", type=int, default=10)
    run.add_argument("--out", required=True)
    run.add_argument("--config", default=None)

    sweep = sub.add_parser("sweep", help="predefined figure sweep")
    sweep.add_argument("--figure", choices=sorted(SWEEPS))
    sweep.add_argument("--out-dir", required=True)
    sweep.add_argument("--N", type=int, dest="n_iters", default=None, help="override budget")
    sweep.add_argument("--config", default=None)

    order = sub.add_parser("order-check", help="empirical integrator order")
    order.add_argument("--tableau", default=None)
    order.add_argument("--tableau-file", default=None)
    order.add_argument("--json", action="store_true")

    assume = sub.add_parser("assumptions", help="flatness / derivative-bound checkers")
    assume.add_argument("--objective", choices=["quadratic", "l4", "logistic", "composite"])
    assume.add_argument("--p", type=int, required=True)
    assume.add_argument("--i", type=int, default=1)
    assume.add_argument("--seed", type=int, default=7)
    assume.add_argument("--samples", type=int, default=200)
    assume.add_argument("--radius", type=float, default=1.0)
    assume.add_argument("--orders", default=None, help="comma list: also bound grad^(i) norms")
    assume.add_argument("--json", action="store_true")

    slope = sub.add_parser("slope", help="log-log rate slope of a trace file")
    slope.add_argument("--trace", required=True)
    slope.add_argument("--window", default="0.3:1.0")
    slope.add_argument("--json", action="store_true")
    return parser


def _resolve_tableau(args):
    if getattr(args, "tableau_file", None):
        return load_tableau(args.tableau_file)
    return builtin_tableau(args.tableau)


def cmd_run(args) -> int:
    if args.objective is None:
        print("error: --objective is required", file=sys.stderr)
        return EXIT_CONFIG
    obj = benchmark_objective(args.objective, args.seed, args.dim)
    if args.h is not None:
        mode, value = "fixed", args.h
    elif args.C is not None:
        mode, value = "schedule", args.C
    else:
        mode, value = "auto", None
    anchor = None
    if args.method == "ode" and obj.optimum_point is None:
        anchor = driver.nag_warm_anchor(obj)
    cfg = driver.RunConfig(
        objective=obj,
        method=args.method,
        n_iters=args.n_iters,
        q=args.q,
        tableau=_resolve_tableau(args) if args.method == "ode" else "rk4",
        step_mode=mode,
        step_value=value,
        seed=args.seed,
        anchor=anchor,
    )
    trace = driver.run_algorithm1(cfg)
    driver.write_trace(args.out, trace)
    print(f"outcome={trace.outcome_tag} final_f_gap={trace.final_f_gap:.17g} h={trace.h:g}")
    return EXIT_DIVERGED if trace.outcome == "diverged" else EXIT_OK


def run_sweep(figure: str, out_dir, n_iters=None, threads=None) -> list[driver.RunTrace]:
    """Run all members of a predefined sweep and write traces + summary.csv."""
    spec = SWEEPS[figure]
    name, seed = spec["objective"]
    obj = benchmark_objective(name, seed)
    budget = n_iters or spec["n_iters"]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    anchor = driver.nag_warm_anchor(obj) if obj.optimum_point is None else None
    base = driver.RunConfig(
        objective=obj, method="ode", n_iters=budget, anchor=anchor, seed=seed
    )

    shared_h = None
    if "shared_step_from" in spec:
        tab_name, q = spec["shared_step_from"]
        shared_h = driver.search_step_size(replace(base, tableau=tab_name, q=q))

    def member_config(label, overrides) -> driver.RunConfig:
        cfg = replace(base, label=label, **overrides)
        if shared_h is not None and cfg.method == "ode":
            cfg = replace(cfg, step_mode="fixed", step_value=shared_h)
        return cfg

    configs = [member_config(label, over) for label, over in spec["members"]]
    if threads is None:
        threads = int(os.environ.get("ODEACCEL_THREADS", os.cpu_count() or 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(driver.run_algorithm1, configs))
    else:
        traces = [driver.run_algorithm1(cfg) for cfg in configs]
    for trace in traces:
        driver.write_trace(out_dir / f"{trace.label}.csv", trace)
    analysis.write_summary(out_dir / "summary.csv", traces)
    return traces


def cmd_sweep(args) -> int:
    if args.figure is None:
        print("error: --figure is required", file=sys.stderr)
        return EXIT_CONFIG
    traces = run_sweep(args.figure, args.out_dir, n_iters=args.n_iters)
    for trace in traces:
        print(f"{trace.label}: outcome={trace.outcome_tag} h={trace.h:g}")
    print(f"summary written to {Path(args.out_dir) / 'summary.csv'}")
    return EXIT_OK


def cmd_order_check(args) -> int:
    tab = _resolve_tableau(args) if (args.tableau or args.tableau_file) else None
    if tab is None:
        print("error: --tableau or --tableau-file is required", file=sys.stderr)
        return EXIT_CONFIG
    obj = benchmark_objective("quadratic", 7)
    order = estimate_order(
        tab, OdeParams(q=2), obj, initial_state(np.zeros(obj.dim)), (1e-2, 5e-3, 2.5e-3)
    )
    if args.json:
        print(json.dumps({"tableau": tab.name, "declared_order": tab.declared_order,
                          "estimated_order": order}))
    else:
        print(f"{tab.name}: declared order {tab.declared_order}, order ~ {order:.2f}")
    ok = abs(order - tab.declared_order) <= 0.3
    return EXIT_OK if ok else EXIT_DIVERGED


def cmd_assumptions(args) -> int:
    if args.objective is None:
        print("error: --objective is required", file=sys.stderr)
        return EXIT_CONFIG
    obj = benchmark_objective(args.objective, args.seed)
    report = analysis.check_assumption1(
        obj, args.p, args.i, sample_count=args.samples, radius=args.radius, seed=args.seed
    )
    payload = {
        "objective": obj.name,
        "p": report.p_tested,
        "i": report.i_tested,
        "L_effective": report.L_effective if report.L_effective != float("inf") else "diverged",
        "violations": report.violations,
        "samples": report.samples,
    }
    if args.orders:
        orders = [int(tok) for tok in args.orders.split(",")]
        norms = analysis.check_assumption2(obj, orders, seed=args.seed)
        payload["derivative_norms"] = {str(k): v for k, v in norms.items()}
    if args.json:
        print(json.dumps(payload))
    else:
        print(
            f"{obj.name}: p={args.p} i={args.i} violations={report.violations} "
            f"L_effective={report.L_effective:g} over {report.samples} samples"
        )
        for key, val in payload.get("derivative_norms", {}).items():
            print(f"  ||grad^({key}) f|| <= {val:g} (sampled max)")
    return EXIT_OK if report.violations == 0 else EXIT_DIVERGED


def cmd_slope(args) -> int:
    trace = driver.read_trace(args.trace)
    lo, hi = (float(tok) for tok in args.window.split(":"))
    est = analysis.fit_loglog_slope(trace, (lo, hi))
    if args.json:
        print(json.dumps({"trace": args.trace, "slope": est.slope, "r2": est.r_squared,
                          "window": [lo, hi], "points": est.points}))
    else:
        print(f"slope={est.slope:.4f} r2={est.r_squared:.4f} ({est.points} points)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config_file(args, args.config)
        handler = {
            "run": cmd_run,
            "sweep": cmd_sweep,
            "order-check": cmd_order_check,
            "assumptions": cmd_assumptions,
            "slope": cmd_slope,
        }[args.command]
        return handler(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    except OdeAccelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
