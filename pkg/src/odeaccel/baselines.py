"""Gradient descent and Nesterov's accelerated gradient, the comparison methods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .objectives import Objective

Array = np.ndarray


@dataclass
class NagState:
    x_prev: Array
    x_curr: Array
    y_curr: Array
    k: int = 1


def nag_init(x0: Array) -> NagState:
    x0 = np.asarray(x0, dtype=float)
    return NagState(x_prev=x0.copy(), x_curr=x0.copy(), y_curr=x0.copy(), k=1)


def momentum_factor(k: int) -> float:
    return (k - 1) / (k + 2)


def gd_step(obj: Objective, x: Array, h: float) -> Array:
    if h <= 0.0:
        raise ConfigError("step size must be positive")
    return x - h * obj.grad(x)


def nag_step(obj: Objective, state: NagState, h: float) -> NagState:
    """x_k = y_{k-1} - h grad f(y_{k-1});  y_k = x_k + (k-1)/(k+2) (x_k - x_{k-1})."""
    if h <= 0.0:
        raise ConfigError("step size must be positive")
    x_new = state.y_curr - h * obj.grad(state.y_curr)
    y_new = x_new + momentum_factor(state.k) * (x_new - state.x_curr)
    return NagState(x_prev=state.x_curr, x_curr=x_new, y_curr=y_new, k=state.k + 1)
