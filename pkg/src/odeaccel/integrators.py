"""Explicit Runge-Kutta stepping parameterized by Butcher tableaus.

Provides the built-in order 1/2/4 methods, a self-converged fine-step
reference solver standing in for the exact flow, and an empirical order
estimator based on one-step (local) error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import AugmentedState, OdeParams, time_power
from .errors import ConfigError, DivergedError, UnreliableEstimateError
from .objectives import Objective

_REFERENCE_MIN_SUBSTEPS = 4096
_REFERENCE_MAX_SUBSTEPS = 1 << 20
_REFERENCE_ATOL = 1e-12


@dataclass(frozen=True)
class ButcherTableau:
    """Coefficients (a_ij, b_i) of an explicit S-stage Runge-Kutta method.

    a is strictly lower triangular (stage i only sees stages j < i) and the
    weights must sum to 1 so that the time coordinate advances by exactly h.
    """

    name: str
    stages: int
    a: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]
    declared_order: int

    def __post_init__(self):
        if self.stages < 1 or self.declared_order < 1:
            raise ConfigError("stages and declared_order must be >= 1")
        if len(self.a) != self.stages or len(self.b) != self.stages:
            raise ConfigError("tableau arrays must have one entry per stage")
        for i, row in enumerate(self.a):
            if len(row) != i:
                raise ConfigError(f"a-row {i} must have exactly {i} coefficients")
        if abs(sum(self.b) - 1.0) > 1e-12:
            raise ConfigError(f"weights of {self.name!r} sum to {sum(self.b)}, not 1")
        object.__setattr__(self, "_c", tuple(math.fsum(row) for row in self.a))

    @property
    def c(self) -> tuple[float, ...]:
        """Stage abscissae c_i = sum_j a_ij."""
        return self._c


@dataclass(frozen=True)
class StepResult:
    next: AugmentedState
    gradient_evals: int


_BUILTIN = {
    "euler": ButcherTableau("euler", 1, ((),), (1.0,), 1),
    "midpoint": ButcherTableau("midpoint", 2, ((), (0.5,)), (0.0, 1.0), 2),
    "rk4": ButcherTableau(
        "rk4",
        4,
        ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
        (1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0),
        4,
    ),
}


def builtin_tableau(name: str) -> ButcherTableau:
    try:
        return _BUILTIN[name]
    except KeyError:
        raise ConfigError(
            f"unknown tableau {name!r}; built-ins are {sorted(_BUILTIN)}"
        ) from None


def load_tableau(path) -> ButcherTableau:
    """Read a tableau file: "S s name", S a-rows (i-1 numbers on row i), b-row."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ConfigError(f"empty tableau file {path}")
    head = lines[0].split()
    if len(head) != 3:
        raise ConfigError("first line must be 'S s name'")
    stages, order, name = int(head[0]), int(head[1]), head[2]
    if len(lines) < stages + 2:
        raise ConfigError(f"expected {stages} a-rows plus a b-row in {path}")
    a = tuple(tuple(float(tok) for tok in lines[1 + i].split()) for i in range(stages))
    b = tuple(float(tok) for tok in lines[1 + stages].split())
    return ButcherTableau(name=name, stages=stages, a=a, b=b, declared_order=order)


def rk_step_arrays(tab: ButcherTableau, params: OdeParams, obj: Objective, v, x, t, h):
    """One explicit RK step on raw (v, x, t) arrays; the driver's hot path.

    Returns the next (v, x, t).  Raises DivergedError if any stage evaluates
    to a non-finite value.
    """
    fc = params.friction_coeff
    fo = params.forcing_coeff
    fe = params.forcing_exponent
    grad = obj.grad
    kv = []
    kx = []
    a = tab.a
    c = tab.c
    for i in range(tab.stages):
        gv, gx, gt = v, x, t + h * c[i]
        if i:
            row = a[i]
            for j in range(i):
                aij = row[j]
                if aij != 0.0:
                    gv = gv + (h * aij) * kv[j]
                    gx = gx + (h * aij) * kx[j]
        if gt <= 0.0 or not np.all(np.isfinite(gv)):
            raise DivergedError(f"stage {i} of {tab.name} left the admissible domain")
        kv.append(-(fc / gt) * gv - fo * time_power(gt, fe) * grad(gx))
        kx.append(gv)
    dv = tab.b[0] * kv[0]
    dx = tab.b[0] * kx[0]
    for i in range(1, tab.stages):
        bi = tab.b[i]
        if bi != 0.0:
            dv = dv + bi * kv[i]
            dx = dx + bi * kx[i]
    # sum(b) == 1 is enforced at construction, so t advances by exactly h
    return v + h * dv, x + h * dx, t + h


def rk_step(
    tab: ButcherTableau, params: OdeParams, obj: Objective, y: AugmentedState, h: float
) -> StepResult:
    """One step of Phi_h; consumes exactly ``tab.stages`` gradient evaluations."""
    if h <= 0.0:
        raise ConfigError(f"step size must be positive, got {h}")
    if not y.is_finite():
        raise DivergedError("non-finite state passed to rk_step")
    v, x, t = rk_step_arrays(tab, params, obj, y.v, y.x, y.t, h)
    return StepResult(next=AugmentedState(v=v, x=x, t=t), gradient_evals=tab.stages)


def _fixed_step_run(params, obj, y0, horizon, n, record_every=None):
    """n rk4 substeps over the horizon; optionally record every record_every-th state.

    The classical rk4 update is unrolled here because reference solves take
    hundreds of thousands of substeps and dominate audit runtimes.
    """
    h = horizon / n
    half = 0.5 * h
    sixth = h / 6.0
    fc = params.friction_coeff
    fo = params.forcing_coeff
    fe = params.forcing_exponent
    grad = obj.grad
    v, x, t = y0.v, y0.x, y0.t
    recorded = []
    for k in range(n):
        tm = t + half
        te = t + h
        g1v = -(fc / t) * v - fo * time_power(t, fe) * grad(x)
        am = fo * time_power(tm, fe)
        v2 = v + half * g1v
        g2v = -(fc / tm) * v2 - am * grad(x + half * v)
        v3 = v + half * g2v
        g3v = -(fc / tm) * v3 - am * grad(x + half * v2)
        v4 = v + h * g3v
        g4v = -(fc / te) * v4 - fo * time_power(te, fe) * grad(x + h * v3)
        x = x + sixth * (v + 2.0 * (v2 + v3) + v4)
        v = v + sixth * (g1v + 2.0 * (g2v + g3v) + g4v)
        t = te
        if record_every is not None and (k + 1) % record_every == 0:
            recorded.append(AugmentedState(v.copy(), x.copy(), t))
    final = AugmentedState(v, x, t)
    if not final.is_finite():
        raise DivergedError("reference solve diverged")
    return final, recorded


def _state_diff(a: AugmentedState, b: AugmentedState) -> float:
    return max(
        float(np.max(np.abs(a.v - b.v))),
        float(np.max(np.abs(a.x - b.x))),
        abs(a.t - b.t),
    )


_reference_cache: dict = {}


def reference_solve(
    params: OdeParams,
    obj: Objective,
    y0: AugmentedState,
    horizon: float,
    atol: float = _REFERENCE_ATOL,
) -> AugmentedState:
    """Near-exact flow over the horizon: rk4 with at least 2^12 substeps,
    halving the step until two refinements agree to < atol in max-norm.

    The result is deterministic in its inputs, so it is memoized; order
    estimation asks for the same flow once per tableau.
    """
    if horizon <= 0.0:
        raise ConfigError("horizon must be positive")
    key = (
        atol,
        params.q,
        params.friction_coeff,
        params.forcing_coeff,
        params.forcing_exponent,
        id(obj),
        y0.v.tobytes(),
        y0.x.tobytes(),
        y0.t,
        horizon,
    )
    cached = _reference_cache.get(key)
    if cached is not None:
        return cached
    n = _REFERENCE_MIN_SUBSTEPS
    prev, _ = _fixed_step_run(params, obj, y0, horizon, n)
    while n <= _REFERENCE_MAX_SUBSTEPS // 2:
        n *= 2
        cur, _ = _fixed_step_run(params, obj, y0, horizon, n)
        if _state_diff(prev, cur) < atol:
            prev = cur
            break
        prev = cur
    if len(_reference_cache) > 256:
        _reference_cache.clear()
    _reference_cache[key] = prev
    return prev


def reference_trajectory(
    params: OdeParams,
    obj: Objective,
    y0: AugmentedState,
    horizon: float,
    checkpoints: int,
    atol: float = _REFERENCE_ATOL,
) -> list[AugmentedState]:
    """Self-converged states at the `checkpoints` equispaced times in (0, horizon].

    Each segment is refined independently from the previous converged
    checkpoint, so stiff early transients do not force the step budget on
    the whole horizon.
    """
    if horizon <= 0.0 or checkpoints < 1:
        raise ConfigError("need positive horizon and at least one checkpoint")
    floor = max(16, -(-_REFERENCE_MIN_SUBSTEPS // checkpoints))
    seg = horizon / checkpoints
    out = []
    state = y0
    for _ in range(checkpoints):
        n = floor
        prev, _ = _fixed_step_run(params, obj, state, seg, n)
        while n <= _REFERENCE_MAX_SUBSTEPS // 2:
            n *= 2
            cur, _ = _fixed_step_run(params, obj, state, seg, n)
            if _state_diff(prev, cur) < atol:
                prev = cur
                break
            prev = cur
        state = prev
        out.append(state)
    return out


def estimate_order(
    tab: ButcherTableau,
    params: OdeParams,
    obj: Objective,
    y0: AugmentedState,
    h_list,
) -> float:
    """Empirical method order from local errors against the reference flow.

    Fits log ||Phi_h(y0) - phi_h(y0)|| against log h and returns slope - 1,
    since the local error of an order-s method scales as h^(s+1).
    """
    h_list = sorted(float(h) for h in h_list)
    if len(h_list) < 3:
        raise ConfigError("need at least 3 step sizes to estimate an order")
    scale = 1.0 + max(
        float(np.max(np.abs(y0.v))), float(np.max(np.abs(y0.x))), abs(y0.t)
    )
    errors = []
    for h in reversed(h_list):
        approx = rk_step(tab, params, obj, y0, h).next
        exact = reference_solve(params, obj, y0, h)
        err = _state_diff(approx, exact)
        if err < 100.0 * np.finfo(float).eps * scale:
            raise UnreliableEstimateError(
                f"local error {err:.3e} at h={h} is below the floating-point "
                "noise floor; use larger steps"
            )
        errors.append(err)
    slope = np.polyfit(np.log(h_list[::-1]), np.log(errors), 1)[0]
    return float(slope) - 1.0
