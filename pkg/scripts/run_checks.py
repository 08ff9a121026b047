#!/usr/bin/env python3
"""Quick verification pass: integrator orders, energy audits, assumption checks.

Prints one line per check; exits non-zero if any check fails.  This is the
fast subset of the acceptance suite, handy while iterating on the numerics.
"""

import sys
import time

import numpy as np

from odeaccel.analysis import check_assumption1, check_assumption2, gradient_check
from odeaccel.dynamics import OdeParams, initial_state
from odeaccel.integrators import builtin_tableau, estimate_order
from odeaccel.lyapunov import audit_continuous_decrease, energy
from odeaccel.objectives import benchmark_objective


def main() -> int:
    failures = 0

    def check(name, ok, detail):
        nonlocal failures
        status = "ok  " if ok else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failures += 0 if ok else 1

    quad = benchmark_objective("quadratic", 7)
    l4 = benchmark_objective("l4", 11)
    logistic = benchmark_objective("logistic", 0)
    composite = benchmark_objective("composite", 5)

    y0 = initial_state(np.zeros(quad.dim))
    start = time.perf_counter()
    for name, declared in (("euler", 1), ("midpoint", 2), ("rk4", 4)):
        order = estimate_order(builtin_tableau(name), OdeParams(q=2), quad, y0,
                               (1e-2, 5e-3, 2.5e-3))
        check(f"order {name}", abs(order - declared) <= 0.3,
              f"estimated {order:.3f}, declared {declared}")
    print(f"       order checks in {time.perf_counter() - start:.1f} s")

    for obj, q in ((quad, 2), (l4, 4)):
        y = initial_state(np.zeros(obj.dim))
        inc = audit_continuous_decrease(OdeParams(q=q), obj, y, 5.0, 100)
        e0 = energy(OdeParams(q=q), obj, y).value
        check(f"energy audit {obj.name}", inc <= 1e-8 * e0,
              f"max increment {inc:.3e} vs budget {1e-8 * e0:.3e}")

    rep = check_assumption1(quad, 2, 1, seed=7)
    check("flatness quadratic p=2", rep.violations == 0,
          f"L_effective {rep.L_effective:.4f}, {rep.samples} samples")
    rep = check_assumption1(l4, 4, 1, seed=11)
    check("flatness l4 p=4", rep.violations == 0,
          f"L_effective {rep.L_effective:.2f}, {rep.samples} samples")
    rep = check_assumption1(quad, 4, 1, seed=7)
    check("flatness quadratic p=4 rejected", rep.violations > 0,
          f"{rep.violations} violations (expected > 0)")

    norms = check_assumption2(l4, [2, 3, 4], seed=11)
    check("derivative bounds l4", norms[4] <= l4.deriv_bound_M,
          f"order-4 sampled norm {norms[4]:.4g} <= M {l4.deriv_bound_M:.4g}")

    for obj in (quad, l4, logistic, composite):
        err = gradient_check(obj, points=20, seed=obj.dim)
        check(f"gradient {obj.name}", err <= 1e-5, f"worst rel. err {err:.2e}")

    print(f"{failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
