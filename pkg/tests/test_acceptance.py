"""Acceptance gate: the twelve desk-scale claims the library must reproduce.

Each test covers one numbered criterion and prints a single summary line so a
plain `pytest -v -s tests/test_acceptance.py` reads as a checklist.  Criteria
that reuse the predefined sweeps share session-scoped fixtures, so each sweep
runs once.
"""

import math
import shutil
import subprocess
import time
from pathlib import Path

import numpy as np
import pytest

from odeaccel import cli
from odeaccel.analysis import (
    check_assumption1,
    check_assumption2,
    fit_loglog_slope,
    gradient_check,
)
from odeaccel.driver import RunConfig, run_algorithm1
from odeaccel.dynamics import OdeParams, initial_state
from odeaccel.integrators import builtin_tableau, estimate_order
from odeaccel.lyapunov import audit_continuous_decrease, energy
from odeaccel.objectives import benchmark_objective

ORDER_STEPS = (1e-2, 5e-3, 2.5e-3)


def _report(num, name, detail):
    print(f"criterion {num:2d} ({name}): PASS  [{detail}]")


def test_criterion_01_integrator_order_law(quad_obj):
    start = time.perf_counter()
    y0 = initial_state(np.zeros(quad_obj.dim))
    params = OdeParams(q=2)
    orders = {
        name: estimate_order(builtin_tableau(name), params, quad_obj, y0, ORDER_STEPS)
        for name in ("euler", "midpoint", "rk4")
    }
    elapsed = time.perf_counter() - start
    for name, declared in (("euler", 1), ("midpoint", 2), ("rk4", 4)):
        assert abs(orders[name] - declared) <= 0.3, (name, orders[name])
    assert elapsed < 5.0, f"order checks took {elapsed:.1f} s"
    _report(1, "integrator order law",
            f"euler {orders['euler']:.2f}, midpoint {orders['midpoint']:.2f}, "
            f"rk4 {orders['rk4']:.2f}, {elapsed:.1f} s")


def test_criterion_02_continuous_energy_decrease(quad_obj, l4_obj):
    start = time.perf_counter()
    increments = {}
    for obj, q in ((quad_obj, 2), (l4_obj, 4)):
        y0 = initial_state(np.zeros(obj.dim))
        inc = audit_continuous_decrease(OdeParams(q=q), obj, y0, 5.0, 100)
        e0 = energy(OdeParams(q=q), obj, y0).value
        assert inc <= 1e-8 * e0, (obj.name, inc, e0)
        increments[obj.name] = inc
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"audits took {elapsed:.1f} s"
    _report(2, "continuous Lyapunov decrease",
            f"max increments {increments['quadratic']:.2e} / {increments['l4']:.2e}, "
            f"{elapsed:.1f} s")


def test_criterion_03_discrete_energy_budget(quad_sweep):
    checked = 0
    for label, trace in quad_sweep.traces.items():
        if trace.method != "ode" or trace.outcome == "diverged":
            continue
        e0 = trace.energy[0]
        ceiling = math.e * e0 + 1.0
        assert np.all(trace.energy <= ceiling), label
        checked += len(trace.energy)
    assert checked > 0
    _report(3, "discrete energy budget", f"{checked} recorded readings under e*E0+1")


def test_criterion_04_euler_instability(quad_obj):
    start = time.perf_counter()
    cfg = RunConfig(objective=quad_obj, method="ode", tableau="euler", q=2,
                    n_iters=10**6)
    trace = run_algorithm1(cfg)
    elapsed = time.perf_counter() - start
    assert trace.outcome == "diverged", trace.outcome_tag
    assert elapsed < 60.0, f"euler run took {elapsed:.1f} s"
    _report(4, "euler instability",
            f"h={trace.h:g} diverged at iteration {trace.diverged_iter}, {elapsed:.1f} s")


def test_criterion_05_quadratic_acceleration_rates(quad_sweep):
    traces = quad_sweep.traces
    slopes = {label: fit_loglog_slope(tr).slope
              for label, tr in traces.items() if tr.outcome != "diverged"}
    assert -2.3 <= slopes["ode_s4"] <= -1.7, slopes["ode_s4"]
    assert slopes["ode_s2"] <= -1.2, slopes["ode_s2"]
    assert slopes["nag"] <= -1.8, slopes["nag"]
    assert -1.3 <= slopes["gd"] <= -0.7, slopes["gd"]
    assert quad_sweep.seconds < 300.0, f"quad sweep took {quad_sweep.seconds:.0f} s"
    _report(5, "quadratic acceleration rates",
            "slopes " + ", ".join(f"{k} {v:.2f}" for k, v in sorted(slopes.items()))
            + f", {quad_sweep.seconds:.0f} s")


def test_criterion_06_decoupling(decouple_sweep):
    traces = decouple_sweep.traces
    assert traces["ode_q2"].outcome != "diverged"
    q2_slope = fit_loglog_slope(traces["ode_q2"]).slope
    assert q2_slope <= -1.7, q2_slope
    assert traces["ode_q3"].outcome == "diverged"
    assert traces["ode_q4"].outcome == "diverged"
    # all four ran with the q=2 searched step, per the sweep definition
    assert len({traces[f"ode_q{q}"].h for q in (1, 2, 3, 4)}) == 1
    assert decouple_sweep.seconds < 180.0, f"sweep took {decouple_sweep.seconds:.0f} s"
    _report(6, "exponent decoupling",
            f"q2 slope {q2_slope:.2f}, q3 diverged:{traces['ode_q3'].diverged_iter}, "
            f"q4 diverged:{traces['ode_q4'].diverged_iter}, {decouple_sweep.seconds:.0f} s")


def test_criterion_07_flat_objective_super_acceleration(l4_sweep):
    traces = l4_sweep.traces
    q4 = fit_loglog_slope(traces["ode_q4"]).slope
    q6 = fit_loglog_slope(traces["ode_q6"]).slope
    assert traces["ode_q4"].outcome != "diverged"
    assert traces["ode_q6"].outcome != "diverged"
    assert q4 <= -2.2, q4
    assert q6 < q4, (q6, q4)
    assert l4_sweep.seconds < 900.0, f"l4 sweep took {l4_sweep.seconds:.0f} s"
    _report(7, "flat-objective super-acceleration",
            f"q4 slope {q4:.2f}, q6 slope {q6:.2f}, {l4_sweep.seconds:.0f} s")


def test_criterion_08_logistic_ordering(logistic_sweep):
    traces = logistic_sweep.traces
    f_nag = traces["nag"].final_f_gap
    f_q2 = traces["ode_q2"].final_f_gap
    f_q4 = traces["ode_q4"].final_f_gap
    assert f_q4 <= f_q2 <= f_nag, (f_q4, f_q2, f_nag)
    assert logistic_sweep.seconds < 900.0, f"sweep took {logistic_sweep.seconds:.0f} s"
    _report(8, "logistic ordering",
            f"final f: q4 {f_q4:.2e} <= q2 {f_q2:.2e} <= nag {f_nag:.2e}, "
            f"{logistic_sweep.seconds:.0f} s")


def test_criterion_09_assumption_checkers(quad_obj, l4_obj):
    start = time.perf_counter()
    quad_report = check_assumption1(quad_obj, 2, 1, seed=7)
    assert quad_report.violations == 0
    # The tight flatness constant for f = ||Ax-b||^2 is 4 lambda_max(A^T A),
    # i.e. twice the gradient Lipschitz constant stored on the objective.
    bound = 2.0 * quad_obj.lipschitz_L * (1.0 + 1e-9)
    assert quad_report.L_effective <= bound, (quad_report.L_effective, bound)

    l4_report = check_assumption1(l4_obj, 4, 1, seed=11)
    assert l4_report.violations == 0

    norms = check_assumption2(l4_obj, [4], seed=11)
    A = l4_obj.data["A"]
    op = float(np.linalg.svd(A, compute_uv=False)[0])
    assert norms[4] <= math.factorial(4) * op**4 * (1.0 + 1e-9)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"checkers took {elapsed:.1f} s"
    _report(9, "assumption checkers",
            f"quad L_eff {quad_report.L_effective:.3f} <= {bound:.3f}, "
            f"l4 L_eff {l4_report.L_effective:.1f}, order-4 norm {norms[4]:.3g}, "
            f"{elapsed:.1f} s")


def test_criterion_10_gradient_correctness(quad_obj, l4_obj, logistic_obj, composite_obj):
    start = time.perf_counter()
    errors = {}
    for obj in (quad_obj, l4_obj, logistic_obj, composite_obj):
        err = gradient_check(obj, points=20, seed=obj.dim)
        assert err <= 1e-5, (obj.name, err)
        errors[obj.name] = err
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0, f"gradient checks took {elapsed:.1f} s"
    _report(10, "gradient correctness",
            "worst rel. err " + ", ".join(f"{k} {v:.1e}" for k, v in errors.items()))


def test_criterion_11_determinism(tmp_path):
    flags = ["run", "--objective", "quadratic", "--method", "ode", "--q", "2",
             "--tableau", "rk4", "--N", "5000", "--h", "0.01", "--seed", "7"]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(flags + ["--out", str(out_a)]) == 0
    assert cli.main(flags + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    _report(11, "determinism", f"{out_a.stat().st_size} identical bytes")


def test_criterion_12_plots_package(quad_sweep):
    frontend = Path(__file__).resolve().parent.parent / "frontend"
    npx = shutil.which("npx")
    if npx is None:
        pytest.skip("node toolchain not available")
    if not (frontend / "node_modules").exists():
        install = subprocess.run(["npm", "install", "--no-audit", "--no-fund"],
                                 cwd=frontend, capture_output=True, text=True,
                                 timeout=600)
        assert install.returncode == 0, install.stderr[-2000:]
    result = subprocess.run([npx, "vitest", "run", "--silent"], cwd=frontend,
                            capture_output=True, text=True, timeout=600)
    assert result.returncode == 0, (result.stdout + result.stderr)[-4000:]
    # also render the real sweep directory end to end via the compiled cli
    build = subprocess.run(["npm", "run", "build"], cwd=frontend,
                           capture_output=True, text=True, timeout=300)
    assert build.returncode == 0, build.stderr[-2000:]
    out = quad_sweep.dir / "fig.svg"
    render = subprocess.run(
        ["node", "dist/cli.js", str(quad_sweep.dir), "--out", str(out),
         "--guides", "-1,-2"],
        cwd=frontend, capture_output=True, text=True, timeout=300,
    )
    assert render.returncode == 0, (render.stdout + render.stderr)[-2000:]
    svg = out.read_text()
    for label in ("gd", "nag", "ode_s1", "ode_s2", "ode_s4"):
        assert label in svg, f"curve {label} missing from figure"
    _report(12, "plots package", "vitest suite green, sweep rendered to SVG")
