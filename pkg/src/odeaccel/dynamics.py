"""Augmented autonomous dynamics of the damped second-order optimization ODE.

The second-order ODE
    x''(t) + (friction/t) x'(t) + forcing * t^exponent * grad f(x(t)) = 0
is rewritten as a first-order autonomous system in y = [v; x; t] so that a
generic one-step integrator can treat time like any other coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DivergedError
from .objectives import Objective

Array = np.ndarray


@dataclass
class AugmentedState:
    """State y = [v; x; t]: velocity, position, and time (t > 0)."""

    v: Array
    x: Array
    t: float

    def is_finite(self) -> bool:
        return (
            np.isfinite(self.t)
            and bool(np.all(np.isfinite(self.v)))
            and bool(np.all(np.isfinite(self.x)))
        )

    def copy(self) -> "AugmentedState":
        return AugmentedState(self.v.copy(), self.x.copy(), self.t)


@dataclass
class OdeParams:
    """Friction and forcing coefficients of the damped ODE, keyed by exponent q.

    Defaults give the accelerated system: friction (2q+1)/t, forcing q^2 t^(q-2).
    friction_coeff = q+1 recovers the time-dilated system; q=2 with
    friction 3, forcing 1, exponent 0 recovers the NAG limit ODE.
    """

    q: int
    friction_coeff: Optional[float] = None
    forcing_coeff: Optional[float] = None
    forcing_exponent: Optional[float] = None

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError(f"q must be an integer >= 1, got {self.q}")
        if self.friction_coeff is None:
            self.friction_coeff = float(2 * self.q + 1)
        if self.forcing_coeff is None:
            self.forcing_coeff = float(self.q**2)
        if self.forcing_exponent is None:
            self.forcing_exponent = float(self.q - 2)


def time_power(t: float, exponent: float) -> float:
    """t**exponent, with small non-negative integer exponents kept exact."""
    if exponent == 0.0:
        return 1.0
    if exponent == 1.0:
        return t
    if exponent == 2.0:
        return t * t
    return t**exponent


def initial_state(x0: Array, start_time: float = 1.0) -> AugmentedState:
    """Canonical start [0; x0; start_time]; the default start time is 1."""
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ConfigError("x0 must be finite")
    if start_time <= 0.0:
        raise ConfigError("start time must be positive")
    return AugmentedState(v=np.zeros_like(x0), x=x0.copy(), t=float(start_time))


def vector_field(params: OdeParams, obj: Objective, y: AugmentedState) -> AugmentedState:
    """Tangent F(y) = [-(friction/t) v - forcing t^e grad f(x); v; 1].

    Exactly one gradient evaluation per call; the t-component is identically 1.
    """
    if not y.is_finite():
        raise DivergedError("non-finite state passed to vector_field")
    if y.t <= 0.0:
        raise ConfigError(f"vector field undefined for t <= 0 (t = {y.t})")
    dv = (
        -(params.friction_coeff / y.t) * y.v
        - params.forcing_coeff * time_power(y.t, params.forcing_exponent) * obj.grad(y.x)
    )
    return AugmentedState(v=dv, x=y.v.copy(), t=1.0)
