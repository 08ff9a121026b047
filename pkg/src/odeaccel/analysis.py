"""Post-hoc analytics: rate-slope fits, stability tables, assumption checkers.

The flatness checker tests f(x) - f* >= (1/L) ||grad^(i) f(x)||^(p/(p-i)) on
sampled points near the optimum.  A finite admissible L exists exactly when
the observed ratio stays bounded as samples approach the optimum; ratios
beyond ``max_l`` (or positive derivative norms at numerically zero
suboptimality) are counted as violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.special import expit

from .driver import RunTrace
from .errors import (
    ConfigError,
    InsufficientDataError,
    UnsupportedObjectiveError,
)
from .objectives import Objective, power_iteration

Array = np.ndarray

DEFAULT_WINDOW = (0.3, 1.0)
_RADIAL_DECADES = 7  # probes at radius * 10^0 ... 10^-6 toward the optimum
_NOISE_FACTOR = 1e3  # multiples of machine epsilon treated as numerically zero

SUMMARY_HEADER = "name,q,s,h,outcome,slope,r2"


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    points: int


@dataclass(frozen=True)
class AssumptionReport:
    p_tested: int
    i_tested: int
    L_effective: float  # inf when any sample admits no finite L
    violations: int
    samples: int


def fit_loglog_slope(trace: RunTrace, window: tuple[float, float] = DEFAULT_WINDOW) -> SlopeEstimate:
    """Least-squares slope of log f_gap vs log iteration over a log-axis window.

    ``window`` is a (start, end] fraction of the log-iteration axis.  Rows
    with non-positive f_gap, or f_gap below 1e3 ulps of the window-start gap,
    are excluded; fewer than 10 surviving rows is an error.
    """
    lo, hi = window
    if not (0.0 <= lo < hi <= 1.0):
        raise ConfigError(f"bad window {window}; need 0 <= start < end <= 1")
    mask = (trace.iters >= 1) & (trace.f_gap > 0.0) & np.isfinite(trace.f_gap)
    iters = trace.iters[mask].astype(float)
    gaps = trace.f_gap[mask]
    if iters.size < 2:
        raise InsufficientDataError("trace has almost no positive f_gap rows")
    log_span = math.log(float(trace.iters[-1])) if trace.iters[-1] > 1 else 1.0
    frac = np.log(iters) / log_span
    in_window = (frac >= lo) & (frac <= hi)
    iters, gaps = iters[in_window], gaps[in_window]
    if iters.size == 0:
        raise InsufficientDataError("no rows inside the fit window")
    floor = _NOISE_FACTOR * np.finfo(float).eps * gaps[0]
    keep = gaps > floor
    iters, gaps = iters[keep], gaps[keep]
    if iters.size < 10:
        raise InsufficientDataError(
            f"only {iters.size} usable rows in window {window}; need >= 10"
        )
    lx, ly = np.log(iters), np.log(gaps)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return SlopeEstimate(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        window=window,
        points=int(iters.size),
    )


def classify_stability(traces: Iterable[RunTrace]) -> dict[str, str]:
    """Map each run label to 'stable' or 'diverged' from its outcome."""
    table = {}
    for trace in traces:
        table[trace.label] = "diverged" if trace.outcome == "diverged" else "stable"
    return table


def _derivative_norm_oracle(obj: Objective, i: int) -> Callable[[Array], float]:
    """Operator norm of grad^(i) f at a point, for the orders we can do exactly."""
    if i == 1:
        return lambda x: float(np.linalg.norm(obj.grad(x)))
    if i == 2:
        if obj.kind == "quadratic":
            A = obj.data["A"]
            const = 2.0 * power_iteration(A.T @ A)
            return lambda x: const
        if obj.kind == "lp":
            A, p = obj.data["A"], obj.data["power"]

            def hess_norm(x: Array) -> float:
                r = A @ x - obj.data["b"]
                H = p * (p - 1) * (A.T * (r ** (p - 2))) @ A
                return float(np.linalg.eigvalsh(H)[-1])

            return hess_norm
        raise UnsupportedObjectiveError(
            f"no Hessian-norm oracle for objective kind {obj.kind!r}"
        )
    raise UnsupportedObjectiveError(f"derivative order {i} not supported")


def check_assumption1(
    obj: Objective,
    p: int,
    i: int,
    sample_count: int = 200,
    radius: float = 1.0,
    seed: int = 0,
    max_l: float = 1e4,
) -> AssumptionReport:
    """Empirical flatness check around the optimum.

    Samples the ball of the given radius around the optimum plus radial
    probes shrinking to radius*1e-6 (where the non-flat case blows up), and
    reports the smallest admissible L together with the violation count.
    """
    if not 1 <= i <= p - 1:
        raise UnsupportedObjectiveError(f"need 1 <= i <= p-1, got i={i}, p={p}")
    if obj.optimum_value is None:
        raise UnsupportedObjectiveError(f"{obj.name} has no reference optimum value")
    center = obj.optimum_point if obj.optimum_point is not None else np.zeros(obj.dim)
    f_star = obj.optimum_value
    deriv_norm = _derivative_norm_oracle(obj, i)

    rng = np.random.default_rng(seed)
    points = []
    for _ in range(sample_count):
        u = rng.standard_normal(obj.dim)
        u *= rng.random() ** (1.0 / obj.dim) / np.linalg.norm(u)
        points.append(center + radius * u)
    for _ in range(4):  # radial probes expose ratios that diverge near x*
        u = rng.standard_normal(obj.dim)
        u /= np.linalg.norm(u)
        for j in range(_RADIAL_DECADES):
            points.append(center + radius * 10.0**-j * u)

    exponent = p / (p - i)
    eps = np.finfo(float).eps
    violations = 0
    best_l = 0.0
    tested = 0
    for x in points:
        gap = obj.f(x) - f_star
        dn = deriv_norm(x)
        noise = _NOISE_FACTOR * eps * (abs(obj.f(x)) + abs(f_star) + 1.0)
        if gap <= noise:
            # Gap is below measurement precision: the true ratio is only
            # known to be >= dn^e / noise, so flag a violation just when
            # that lower bound already exceeds the cap.
            if dn**exponent > max_l * noise:
                tested += 1
                violations += 1
            continue
        tested += 1
        ratio = dn**exponent / gap
        if ratio > max_l:
            violations += 1
        else:
            best_l = max(best_l, ratio)
    l_eff = math.inf if violations else best_l
    return AssumptionReport(
        p_tested=p, i_tested=i, L_effective=l_eff, violations=violations, samples=tested
    )


def _logistic_derivative_poly(order: int) -> np.polynomial.Polynomial:
    """d^order/dz^order of log(1+e^-z) as a polynomial in s = sigmoid(z)."""
    poly = np.polynomial.Polynomial([-1.0, 1.0])  # first derivative: s - 1
    chain = np.polynomial.Polynomial([0.0, 1.0, -1.0])  # ds/dz = s(1-s)
    for _ in range(order - 1):
        poly = poly.deriv() * chain
    return poly


def check_assumption2(
    obj: Objective,
    orders: Iterable[int],
    sample_count: int = 50,
    radius: float = 1.0,
    seed: int = 0,
) -> dict[int, float]:
    """Max observed operator norm of grad^(i) f per requested order.

    Uses the closed-form tensor structure of each supported objective and
    probes the unit sphere; the result is a sampled maximum, guaranteed not
    to exceed the true operator norm.
    """
    rng = np.random.default_rng(seed)
    out: dict[int, float] = {}
    for order in orders:
        if order < 2:
            raise UnsupportedObjectiveError("orders below 2 are not derivative bounds")
        if obj.kind == "quadratic":
            A = obj.data["A"]
            out[order] = 2.0 * power_iteration(A.T @ A) if order == 2 else 0.0
        elif obj.kind == "lp":
            out[order] = _lp_deriv_norm(obj, order, sample_count, radius, rng)
        elif obj.kind == "logistic":
            out[order] = _logistic_deriv_norm(obj, order, sample_count, radius, rng)
        else:
            raise UnsupportedObjectiveError(
                f"no derivative-norm oracle for objective kind {obj.kind!r}"
            )
    return out


def _unit_directions(rng, dim: int, count: int) -> Array:
    dirs = rng.standard_normal((count, dim))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _lp_deriv_norm(obj: Objective, order: int, sample_count: int, radius: float, rng) -> float:
    A, b, p = obj.data["A"], obj.data["b"], obj.data["power"]
    if order > p:
        return 0.0
    coeff = math.factorial(p) / math.factorial(p - order)
    center = obj.optimum_point if obj.optimum_point is not None else np.zeros(obj.dim)
    dirs = _unit_directions(rng, obj.dim, sample_count)
    if order == p:  # residual-independent: p! * max_u sum_j (A_j u)^p
        return float(coeff * np.max(np.sum((dirs @ A.T) ** p, axis=1)))
    best = 0.0
    for _ in range(sample_count):
        x = center + radius * rng.standard_normal(obj.dim)
        r = A @ x - b
        vals = np.abs((dirs @ A.T) ** order @ (r ** (p - order)))
        best = max(best, coeff * float(np.max(vals)))
    return best


def _logistic_deriv_norm(obj: Objective, order: int, sample_count: int, radius: float, rng) -> float:
    W = obj.data["W"]
    poly = _logistic_derivative_poly(order)
    dirs = _unit_directions(rng, obj.dim, sample_count)
    best = 0.0
    for _ in range(sample_count):
        x = radius * rng.standard_normal(obj.dim)
        coeffs = poly(expit(W @ x))
        vals = np.abs((dirs @ W.T) ** order @ coeffs)
        best = max(best, float(np.max(vals)))
    return best


def finite_difference_gradient(f: Callable[[Array], float], x: Array, step: float = 1e-6) -> Array:
    """Central finite-difference gradient, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def gradient_check(
    obj: Objective,
    points: int = 20,
    radius: float = 1.0,
    step: float = 1e-6,
    seed: int = 0,
    center: Optional[Array] = None,
) -> float:
    """Worst relative error between obj.grad and central finite differences."""
    rng = np.random.default_rng(seed)
    c = np.zeros(obj.dim) if center is None else np.asarray(center, dtype=float)
    worst = 0.0
    for _ in range(points):
        u = rng.standard_normal(obj.dim)
        u *= rng.random() ** (1.0 / obj.dim) / np.linalg.norm(u)
        x = c + radius * u
        g = obj.grad(x)
        g_fd = finite_difference_gradient(obj.f, x, step)
        err = np.linalg.norm(g - g_fd) / max(np.linalg.norm(g_fd), 1e-12)
        worst = max(worst, float(err))
    return worst


def write_summary(path, traces: Iterable[RunTrace], window=DEFAULT_WINDOW):
    """One-line-per-run sweep summary: name, q, s, h, outcome, slope, r2."""
    lines = [SUMMARY_HEADER]
    for tr in traces:
        try:
            est = fit_loglog_slope(tr, window)
            slope, r2 = f"{est.slope:.6g}", f"{est.r_squared:.6g}"
        except (InsufficientDataError, ConfigError):
            slope, r2 = "", ""
        q = tr.q if tr.q is not None else ""
        s = tr.order if tr.order is not None else ""
        lines.append(f"{tr.label},{q},{s},{tr.h:.17g},{tr.outcome_tag},{slope},{r2}")
    Path(path).write_text("\n".join(lines) + "\n")
