"""End-to-end iteration driver: step-size selection, the main loop, traces.

A run starts from y0 = [0; x0; 1], advances N fixed-size steps, records a
(geometrically thinned) trace of suboptimality, gradient norm and Lyapunov
energy, and halts early with outcome "diverged" when a recorded iterate is
non-finite or breaches the energy ceiling e*E0 + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import baselines
from .dynamics import AugmentedState, OdeParams, initial_state
from .errors import ConfigError, DivergedError, StepSearchError
from .integrators import ButcherTableau, builtin_tableau, rk_step_arrays
from .lyapunov import EnergyBudget, check_budget, energy, resolve_anchor
from .objectives import Objective

Array = np.ndarray

_CONVERGED_ATOL = 1e-13
_SEARCH_FLOOR_EXPONENT = 12  # smallest probed step is 10**-12
_GEOMETRIC_RATIO = 1.02

TRACE_HEADER = "iter,t,f_gap,grad_norm,energy,grad_evals"


@dataclass
class RunConfig:
    objective: Objective
    method: str  # ode | gd | nag
    n_iters: int
    q: int = 2
    tableau: Union[str, ButcherTableau] = "rk4"
    step_mode: str = "auto"  # auto | fixed | schedule
    step_value: Optional[float] = None  # h for fixed, C for schedule
    x0: Optional[Array] = None
    seed: int = 0
    trace_stride: Optional[int] = None  # None = geometric ~1.02x thinning
    start_time: float = 1.0
    anchor: Optional[Array] = None
    probe_iters: int = 1000
    label: Optional[str] = None

    def resolved_tableau(self) -> ButcherTableau:
        if isinstance(self.tableau, ButcherTableau):
            return self.tableau
        return builtin_tableau(self.tableau)

    def resolved_x0(self) -> Array:
        if self.x0 is None:
            return np.zeros(self.objective.dim)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.objective.dim,):
            raise ConfigError(
                f"x0 has shape {x0.shape}, objective dimension is {self.objective.dim}"
            )
        return x0

    def validate(self):
        if self.method not in ("ode", "gd", "nag"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.n_iters < 1:
            raise ConfigError("n_iters must be >= 1")
        if self.trace_stride is not None and self.trace_stride < 1:
            raise ConfigError("trace_stride must be >= 1")
        if self.step_mode not in ("auto", "fixed", "schedule"):
            raise ConfigError(f"unknown step_mode {self.step_mode!r}")
        if self.step_mode in ("fixed", "schedule"):
            if self.step_value is None or self.step_value <= 0.0:
                raise ConfigError(f"step_mode {self.step_mode!r} needs a positive step_value")
        if self.method == "ode":
            self.resolved_tableau()
        self.resolved_x0()


@dataclass
class RunTrace:
    iters: Array
    t: Array
    f_gap: Array
    grad_norm: Array
    energy: Array  # NaN where unavailable (baselines)
    grad_evals: Array
    outcome: str  # converged | budget_exhausted | diverged
    diverged_iter: Optional[int] = None
    h: float = float("nan")
    method: str = ""
    label: str = ""
    q: Optional[int] = None
    order: Optional[int] = None
    stages: int = 1

    @property
    def outcome_tag(self) -> str:
        if self.outcome == "diverged":
            return f"diverged:{self.diverged_iter}"
        return self.outcome

    @property
    def final_f_gap(self) -> float:
        return float(self.f_gap[-1])


def recorded_iterations(n: int, stride: Optional[int]) -> list[int]:
    """Iterations to record: fixed stride, or ~1.02x geometric spacing."""
    if stride is not None:
        ks = list(range(0, n, stride))
    else:
        ks = [0]
        k = 1
        while k < n:
            ks.append(k)
            k = max(k + 1, int(k * _GEOMETRIC_RATIO))
    if ks[-1] != n:
        ks.append(n)
    return ks


def schedule_step_size(C: float, n: int, s: int) -> float:
    """Theoretical schedule h = C * N^(-1/(s+1)) for an order-s integrator."""
    if C <= 0.0:
        raise ConfigError("C must be positive")
    return C * n ** (-1.0 / (s + 1))


def _energy_reference(cfg: RunConfig):
    """(x_ref, f_ref) for energy/suboptimality, or (None, f_ref) when only a
    reference value exists and no anchor was configured."""
    obj = cfg.objective
    if obj.optimum_point is not None or cfg.anchor is not None:
        return resolve_anchor(obj, cfg.anchor)
    return None, obj.optimum_value


class _Recorder:
    """Accumulates trace rows and applies the divergence checks."""

    def __init__(self, cfg: RunConfig, params: Optional[OdeParams], h: float, stages: int):
        self.cfg = cfg
        self.obj = cfg.objective
        self.params = params
        self.h = h
        self.stages = stages
        self.x_ref, self.f_ref = _energy_reference(cfg)
        if self.f_ref is None:
            raise ConfigError(
                f"objective {self.obj.name!r} has no optimum value; cannot measure f_gap"
            )
        # With an anchor standing in for an optimum at infinity the energy is
        # not a Lyapunov function, so its ceiling cannot serve as a
        # divergence detector; those runs fall back to the f-gap sublevel
        # ceiling used for the baselines.
        self.enforce_energy = self.obj.optimum_point is not None
        self.budget: Optional[EnergyBudget] = None
        self.rows: list[tuple] = []
        self.diverged_iter: Optional[int] = None

    def _energy_value(self, v, x, t) -> float:
        if self.params is None or self.x_ref is None:
            return float("nan")
        reading = energy(self.params, self.obj, AugmentedState(v, x, t), anchor=self.x_ref)
        if self.budget is None:
            self.budget = EnergyBudget(e0=reading.value)
        elif self.enforce_energy and check_budget(self.budget, reading) == "exceeded":
            return float("inf")  # sentinel; caller marks divergence
        return reading.value

    def record(self, k: int, v, x, t) -> bool:
        """Record iterate k; returns False when the run must halt as diverged."""
        if not (np.all(np.isfinite(x)) and (v is None or np.all(np.isfinite(v)))):
            self.diverged_iter = k
            return False
        f_gap = self.obj.f(x) - self.f_ref
        g_norm = float(np.linalg.norm(self.obj.grad(x)))
        if not (math.isfinite(f_gap) and math.isfinite(g_norm)):
            self.diverged_iter = k
            return False
        e_val = self._energy_value(v, x, t) if v is not None else float("nan")
        if math.isinf(e_val):
            self.diverged_iter = k
            return False
        if (self.params is None or not self.enforce_energy) and self._f_ceiling_exceeded(f_gap):
            self.diverged_iter = k
            return False
        self.rows.append((k, t, f_gap, g_norm, e_val, k * self.stages))
        return True

    def _f_ceiling_exceeded(self, f_gap: float) -> bool:
        # sublevel proxy for baselines, mirroring the energy ceiling
        if self.x_ref is None:
            return False
        if not hasattr(self, "_f_ceiling"):
            x0 = self.cfg.resolved_x0()
            e0 = self.obj.f(x0) - self.f_ref + float(np.sum((x0 - self.x_ref) ** 2))
            self._f_ceiling = math.e * e0 + 1.0
        return f_gap > self._f_ceiling

    def finish(self, cfg_label: str, q, order) -> RunTrace:
        rows = self.rows
        if not rows:
            rows = [(0, self.cfg.start_time, float("nan"), float("nan"), float("nan"), 0)]
        cols = list(zip(*rows))
        outcome = "budget_exhausted"
        if self.diverged_iter is not None:
            outcome = "diverged"
        elif rows[-1][2] <= _CONVERGED_ATOL * (1.0 + abs(self.f_ref)):
            outcome = "converged"
        return RunTrace(
            iters=np.asarray(cols[0], dtype=int),
            t=np.asarray(cols[1], dtype=float),
            f_gap=np.asarray(cols[2], dtype=float),
            grad_norm=np.asarray(cols[3], dtype=float),
            energy=np.asarray(cols[4], dtype=float),
            grad_evals=np.asarray(cols[5], dtype=int),
            outcome=outcome,
            diverged_iter=self.diverged_iter,
            h=self.h,
            method=self.cfg.method,
            label=cfg_label,
            q=q,
            order=order,
            stages=self.stages,
        )


def _resolve_step(cfg: RunConfig) -> float:
    if cfg.step_mode == "fixed":
        return cfg.step_value
    if cfg.step_mode == "schedule":
        s = cfg.resolved_tableau().declared_order if cfg.method == "ode" else 1
        return schedule_step_size(cfg.step_value, cfg.n_iters, s)
    return search_step_size(cfg)


def run_algorithm1(cfg: RunConfig) -> RunTrace:
    """Run the configured method for cfg.n_iters steps and return its trace."""
    cfg.validate()
    h = _resolve_step(cfg)
    if cfg.method == "ode":
        return _run_ode(cfg, h)
    return _run_baseline(cfg, h)


def _run_ode(cfg: RunConfig, h: float) -> RunTrace:
    tab = cfg.resolved_tableau()
    params = OdeParams(q=cfg.q)
    obj = cfg.objective
    rec = _Recorder(cfg, params, h, tab.stages)
    y = initial_state(cfg.resolved_x0(), cfg.start_time)
    v, x, t = y.v, y.x, y.t
    record_at = recorded_iterations(cfg.n_iters, cfg.trace_stride)
    idx = 0
    rec.record(0, v, x, t)
    idx += 1
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(1, cfg.n_iters + 1):
            try:
                v, x, t = rk_step_arrays(tab, params, obj, v, x, t, h)
            except DivergedError:
                rec.diverged_iter = k
                break
            if idx < len(record_at) and k == record_at[idx]:
                idx += 1
                if not rec.record(k, v, x, t):
                    break
    return rec.finish(cfg.label or f"ode_s{tab.declared_order}_q{cfg.q}", cfg.q, tab.declared_order)


def _run_baseline(cfg: RunConfig, h: float) -> RunTrace:
    obj = cfg.objective
    rec = _Recorder(cfg, None, h, 1)
    x0 = cfg.resolved_x0()
    record_at = recorded_iterations(cfg.n_iters, cfg.trace_stride)
    idx = 0
    rec.record(0, None, x0, 0.0)
    idx += 1
    state = baselines.nag_init(x0) if cfg.method == "nag" else None
    x = x0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, cfg.n_iters + 1):
            if cfg.method == "gd":
                x = x - h * obj.grad(x)
            else:
                g = obj.grad(state.y_curr)
                x_new = state.y_curr - h * g
                m = (state.k - 1) / (state.k + 2)
                state.y_curr = x_new + m * (x_new - state.x_curr)
                state.x_curr = x_new
                state.k += 1
                x = x_new
            if idx < len(record_at) and k == record_at[idx]:
                idx += 1
                if not rec.record(k, None, x, k * h):
                    break
    return rec.finish(cfg.label or cfg.method, None, None)


def _probe_stable(cfg: RunConfig, h: float) -> tuple[bool, str]:
    """Probe cfg.probe_iters iterations at step h.

    Stable means: every iterate finite, every energy reading within the
    ceiling (f-gap sublevel proxy for baselines), and the probe ends with a
    strictly smaller f-gap than it started with (rejects marginal cycling).
    """
    probe_cfg = replace(cfg, n_iters=cfg.probe_iters, step_mode="fixed", step_value=h,
                        trace_stride=1)
    trace = run_algorithm1(probe_cfg)
    if trace.outcome == "diverged":
        return False, f"h={h:g}: diverged at iteration {trace.diverged_iter}"
    f0, f_end = float(trace.f_gap[0]), float(trace.f_gap[-1])
    if f0 > _CONVERGED_ATOL and not f_end < f0:
        return False, f"h={h:g}: no decrease over the probe (f_gap {f0:g} -> {f_end:g})"
    return True, f"h={h:g}: stable"


def search_step_size(cfg: RunConfig, probe_iters: Optional[int] = None) -> float:
    """Largest h in {10^0, 10^-1, ...} whose probe run stays stable."""
    if probe_iters is not None:
        cfg = replace(cfg, probe_iters=probe_iters)
    if cfg.probe_iters < 1:
        raise ConfigError("probe_iters must be >= 1")
    diagnostics = []
    for k in range(_SEARCH_FLOOR_EXPONENT + 1):
        h = 10.0**-k
        ok, info = _probe_stable(cfg, h)
        diagnostics.append(info)
        if ok:
            return h
    raise StepSearchError(
        f"no stable step size found down to 1e-{_SEARCH_FLOOR_EXPONENT}",
        diagnostics=diagnostics,
    )


def nag_warm_anchor(obj: Objective, x0: Optional[Array] = None, iters: int = 20000) -> Array:
    """Anchor point for objectives whose optimum is at infinity (logistic):
    the endpoint of a long NAG run at its own searched step size."""
    cfg = RunConfig(objective=obj, method="nag", n_iters=iters, x0=x0)
    h = search_step_size(cfg)
    state = baselines.nag_init(cfg.resolved_x0())
    for _ in range(iters):
        state = baselines.nag_step(obj, state, h)
    return state.x_curr


def write_trace(path, trace: RunTrace):
    """CSV with 17-significant-digit floats and a trailing outcome comment."""
    lines = [TRACE_HEADER]
    for i in range(len(trace.iters)):
        e = trace.energy[i]
        e_txt = "" if math.isnan(e) else f"{e:.17g}"
        lines.append(
            f"{trace.iters[i]},{trace.t[i]:.17g},{trace.f_gap[i]:.17g},"
            f"{trace.grad_norm[i]:.17g},{e_txt},{trace.grad_evals[i]}"
        )
    lines.append(f"# outcome={trace.outcome_tag}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> RunTrace:
    """Parse a trace CSV written by :func:`write_trace`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ConfigError(f"{path}: missing trace header {TRACE_HEADER!r}")
    rows = []
    outcome, diverged_iter = "budget_exhausted", None
    for ln, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            tag = line.split("=", 1)[-1].strip()
            if tag.startswith("diverged"):
                outcome = "diverged"
                diverged_iter = int(tag.split(":")[1])
            else:
                outcome = tag
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ConfigError(f"{path}:{ln}: expected 6 fields, got {len(parts)}")
        try:
            rows.append(
                (
                    int(parts[0]),
                    float(parts[1]),
                    float(parts[2]),
                    float(parts[3]),
                    float(parts[4]) if parts[4] else float("nan"),
                    int(parts[5]),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{path}:{ln}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    cols = list(zip(*rows))
    return RunTrace(
        iters=np.asarray(cols[0], dtype=int),
        t=np.asarray(cols[1], dtype=float),
        f_gap=np.asarray(cols[2], dtype=float),
        grad_norm=np.asarray(cols[3], dtype=float),
        energy=np.asarray(cols[4], dtype=float),
        grad_evals=np.asarray(cols[5], dtype=int),
        outcome=outcome,
        diverged_iter=diverged_iter,
        label=Path(path).stem,
    )
