"""Lyapunov energy of the damped ODE and the runtime audits built on it.

E(y) = t^2/(4p^2) ||v||^2 + ||x + (t/2p) v - x*||^2 + t^p (f(x) - f*)

with p the ODE exponent.  Along exact trajectories with friction (2p+1)/t the
energy is non-increasing; discrete iterates with a suitable step size stay
under the ceiling e*E(y0) + 1, which the driver uses as its divergence
detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import AugmentedState, OdeParams
from .errors import UnsupportedObjectiveError
from .integrators import reference_trajectory
from .objectives import Objective

Array = np.ndarray


@dataclass(frozen=True)
class EnergyReading:
    kinetic_term: float
    mixing_term: float
    potential_term: float

    @property
    def value(self) -> float:
        return self.kinetic_term + self.mixing_term + self.potential_term


@dataclass(frozen=True)
class EnergyBudget:
    """Stability envelope e*E0 + 1 for discrete iterates."""

    e0: float

    @property
    def ceiling(self) -> float:
        return math.e * self.e0 + 1.0


def resolve_anchor(obj: Objective, anchor: Optional[Array] = None) -> tuple[Array, float]:
    """Reference point and value for the energy: the optimum when known,
    otherwise a caller-supplied anchor paired with optimum_value."""
    if anchor is not None:
        if obj.optimum_value is None:
            raise UnsupportedObjectiveError(
                f"{obj.name} has no optimum_value to anchor the potential term"
            )
        return np.asarray(anchor, dtype=float), obj.optimum_value
    if obj.optimum_point is None or obj.optimum_value is None:
        raise UnsupportedObjectiveError(
            f"{obj.name} has no optimum data; pass an anchor point explicitly"
        )
    return obj.optimum_point, obj.optimum_value


def energy(
    params: OdeParams,
    obj: Objective,
    y: AugmentedState,
    anchor: Optional[Array] = None,
) -> EnergyReading:
    """Evaluate the three energy terms at y, with p = params.q."""
    x_ref, f_ref = resolve_anchor(obj, anchor)
    p = params.q
    t = y.t
    kinetic = t * t / (4.0 * p * p) * float(y.v @ y.v)
    mix = y.x + (t / (2.0 * p)) * y.v - x_ref
    mixing = float(mix @ mix)
    potential = t**p * (obj.f(y.x) - f_ref)
    return EnergyReading(kinetic_term=kinetic, mixing_term=mixing, potential_term=potential)


def audit_continuous_decrease(
    params: OdeParams,
    obj: Objective,
    y0: AugmentedState,
    horizon: float,
    samples: int,
    anchor: Optional[Array] = None,
    atol: float = 1e-10,
) -> float:
    """Largest energy increment between consecutive checkpoints of the
    near-exact flow.  Non-positive (up to integration tolerance) when the
    friction coefficient is the accelerated (2q+1)/t choice; with the
    time-dilated (q+1)/t friction the monotone decrease is not guaranteed.

    The integration tolerance defaults looser than the reference solver's
    because the audit compares energies, not states; 1e-10 keeps the energy
    error orders of magnitude below any plausible decrease threshold."""
    states = reference_trajectory(params, obj, y0, horizon, samples, atol=atol)
    values = [energy(params, obj, s, anchor).value for s in [y0, *states]]
    return max(b - a for a, b in zip(values, values[1:]))


def check_budget(budget: EnergyBudget, reading: EnergyReading) -> str:
    """'within' iff the reading respects the ceiling e*E0 + 1."""
    return "within" if reading.value <= budget.ceiling else "exceeded"
