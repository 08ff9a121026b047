"""Accelerated convex optimization by direct Runge-Kutta discretization of a
damped second-order ODE, plus the measurement harness around it."""

from .baselines import NagState, gd_step, momentum_factor, nag_init, nag_step
from .dynamics import AugmentedState, OdeParams, initial_state, vector_field
from .driver import (
    RunConfig,
    RunTrace,
    read_trace,
    run_algorithm1,
    schedule_step_size,
    search_step_size,
    write_trace,
)
from .integrators import (
    ButcherTableau,
    StepResult,
    builtin_tableau,
    estimate_order,
    load_tableau,
    reference_solve,
    reference_trajectory,
    rk_step,
)
from .lyapunov import (
    EnergyBudget,
    EnergyReading,
    audit_continuous_decrease,
    check_budget,
    energy,
)
from .analysis import (
    AssumptionReport,
    SlopeEstimate,
    check_assumption1,
    check_assumption2,
    classify_stability,
    fit_loglog_slope,
    gradient_check,
    write_summary,
)
from .objectives import (
    Objective,
    SeparableDataset,
    benchmark_objective,
    generate_separable_data,
    make_composite,
    make_logistic,
    make_lp_regression,
    make_quadratic,
)

__all__ = [name for name in dir() if not name.startswith("_")]
