"""Benchmark objectives and their first-order oracles.

Every builder returns an immutable :class:`Objective` carrying the function,
its exact gradient, optimum data when it is computable, and the flatness /
derivative-bound metadata used by the ODE driver and the assumption checkers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError

Array = np.ndarray

# Class-conditional mean magnitude and the number of Newton iterations used
# when the lp optimum has to be computed numerically.  Not tuned per problem.
_SEPARABLE_MEAN_NORM = 2.0
_NEWTON_MAX_ITERS = 200

# Redraw threshold for the benchmark design matrix.  Square Gaussian draws are
# occasionally near-singular, which turns every rate study into a plateau;
# typical draws condition at ~1e2..1e4.
_SEPARABLE_MAX_COND = 1e4

# Decades of column rescaling applied to the quadratic benchmark so its
# spectrum is spread log-uniformly; see benchmark_objective.
_QUADRATIC_SCALE_SPAN = 4.5


@dataclass(frozen=True)
class Objective:
    """Immutable first-order oracle for a smooth convex function."""

    name: str
    kind: str
    dim: int
    f: Callable[[Array], float]
    grad: Callable[[Array], Array]
    flatness_p: int
    optimum_value: Optional[float] = None
    optimum_point: Optional[Array] = None
    lipschitz_L: Optional[float] = None
    deriv_bound_M: Optional[float] = None
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SeparableDataset:
    """Linearly separable binary dataset with a margin certificate.

    ``certificate`` is a direction x with strict label-consistent sign of
    ``features @ x`` for every row; it exists by construction.
    """

    features: Array
    labels: Array
    seed: int
    certificate: Array


def power_iteration(mat: Array, tol: float = 1e-10, max_iters: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(mat.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = mat @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ mat @ v_new)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        v, lam = v_new, lam_new
    return lam


def _check_system(A: Array, b: Array) -> tuple[Array, Array]:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.ndim != 1:
        raise ConfigError("A must be a matrix and b a vector")
    if A.shape[0] != b.shape[0]:
        raise ConfigError(f"row count mismatch: A has {A.shape[0]} rows, b has {b.shape[0]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ConfigError("A and b must be finite")
    return A, b


def make_quadratic(A: Array, b: Array) -> Objective:
    """Least-squares objective f(x) = ||Ax - b||^2.

    The optimum is the minimum-norm least-squares solution.  ``lipschitz_L``
    is the gradient Lipschitz constant 2*lambda_max(A^T A), computed by power
    iteration to tolerance 1e-10.
    """
    A, b = _check_system(A, b)
    x_star, *_ = np.linalg.lstsq(A, b, rcond=None)
    f_star = float(np.sum((A @ x_star - b) ** 2))
    lip = 2.0 * power_iteration(A.T @ A)

    def f(x: Array) -> float:
        r = A @ x - b
        return float(r @ r)

    G = 2.0 * (A.T @ A)  # gradient is the affine map G x - c0
    c0 = 2.0 * (A.T @ b)

    def grad(x: Array) -> Array:
        return G @ x - c0

    return Objective(
        name="quadratic",
        kind="quadratic",
        dim=A.shape[1],
        f=f,
        grad=grad,
        flatness_p=2,
        optimum_value=f_star,
        optimum_point=x_star,
        lipschitz_L=lip,
        deriv_bound_M=lip,  # the Hessian is the largest derivative; higher orders vanish
        data={"A": A, "b": b},
    )


def _newton_lp_optimum(A: Array, b: Array, power: int) -> tuple[Array, float]:
    """Minimize sum((Ax-b)^power) by damped Newton; the problem is smooth convex."""
    x = np.linalg.lstsq(A, b, rcond=None)[0]
    scale = 1.0 + float(np.sum(np.abs(b) ** power))
    for _ in range(_NEWTON_MAX_ITERS):
        r = A @ x - b
        g = power * (A.T @ (r ** (power - 1)))
        if np.linalg.norm(g) <= 1e-13 * scale:
            break
        H = power * (power - 1) * (A.T * (r ** (power - 2))) @ A
        H += 1e-14 * scale * np.eye(A.shape[1])
        step = np.linalg.solve(H, g)
        fx = float(np.sum(r ** power))
        alpha = 1.0
        while alpha > 1e-12:
            x_new = x - alpha * step
            if float(np.sum((A @ x_new - b) ** power)) <= fx:
                break
            alpha *= 0.5
        x = x - alpha * step
    return x, float(np.sum((A @ x - b) ** power))


def make_lp_regression(A: Array, b: Array, power: int) -> Objective:
    """lp-power regression f(x) = sum_i (A_i x - b_i)^power for even power >= 2.

    When Ax = b is solvable the optimum is exact with value 0; otherwise it is
    computed by damped Newton to gradient norm ~1e-13.
    """
    if power < 2 or power % 2 != 0:
        raise ConfigError(f"power must be an even integer >= 2, got {power}")
    A, b = _check_system(A, b)

    x_ls = np.linalg.lstsq(A, b, rcond=None)[0]
    residual = np.linalg.norm(A @ x_ls - b)
    if residual <= 1e-10 * (1.0 + np.linalg.norm(b)):
        x_star, f_star = x_ls, 0.0
    else:
        x_star, f_star = _newton_lp_optimum(A, b, power)

    op_norm_A = math.sqrt(power_iteration(A.T @ A))
    M = float(math.factorial(power)) * op_norm_A**power

    def _int_pow(r: Array, k: int) -> Array:
        # repeated multiply beats float pow for the small exponents used here
        out = r
        for _ in range(k - 1):
            out = out * r
        return out

    def f(x: Array) -> float:
        r = A @ x - b
        return float(np.sum(_int_pow(r, power)))

    def grad(x: Array) -> Array:
        return power * (A.T @ _int_pow(A @ x - b, power - 1))

    return Objective(
        name=f"l{power}",
        kind="lp",
        dim=A.shape[1],
        f=f,
        grad=grad,
        flatness_p=power,
        optimum_value=f_star,
        optimum_point=x_star,
        lipschitz_L=2.0 * power_iteration(A.T @ A) if power == 2 else None,
        deriv_bound_M=M,
        data={"A": A, "b": b, "power": power},
    )


def make_logistic(data: SeparableDataset) -> Objective:
    """Sum of logistic losses f(x) = sum_i log(1 + exp(-w_i^T x)).

    The infimum over separable data is 0 and is never attained, so
    ``optimum_value`` is 0 and ``optimum_point`` is absent.  Evaluation uses
    log-sum-exp so arguments as large as +-1e4 stay finite.
    """
    W = np.asarray(data.features, dtype=float)

    def f(x: Array) -> float:
        z = W @ x
        return float(np.sum(np.logaddexp(0.0, -z)))

    def grad(x: Array) -> Array:
        z = W @ x
        return -(W.T @ expit(-z))

    return Objective(
        name="logistic",
        kind="logistic",
        dim=W.shape[1],
        f=f,
        grad=grad,
        flatness_p=2,
        optimum_value=0.0,
        optimum_point=None,
        lipschitz_L=0.5 * power_iteration(W.T @ W),
        deriv_bound_M=None,
        data={"W": W, "labels": np.asarray(data.labels)},
    )


def make_composite(A: Array, b: Array, C: Array, d: Array) -> Objective:
    """Block-separable f([x1, x2]) = ||A x1 - b||^2 + ||C x2 - d||_4^4."""
    quad = make_quadratic(A, b)
    quart = make_lp_regression(C, d, power=4)
    d1, d2 = quad.dim, quart.dim

    def f(x: Array) -> float:
        return quad.f(x[:d1]) + quart.f(x[d1:])

    def grad(x: Array) -> Array:
        return np.concatenate([quad.grad(x[:d1]), quart.grad(x[d1:])])

    opt_point = None
    opt_value = None
    if quad.optimum_point is not None and quart.optimum_point is not None:
        opt_point = np.concatenate([quad.optimum_point, quart.optimum_point])
        opt_value = quad.optimum_value + quart.optimum_value

    return Objective(
        name="composite",
        kind="composite",
        dim=d1 + d2,
        f=f,
        grad=grad,
        flatness_p=2,  # dominated by the quadratic block
        optimum_value=opt_value,
        optimum_point=opt_point,
        lipschitz_L=None,
        deriv_bound_M=None,
        data={"A": A, "b": b, "C": C, "d": d, "split": d1, "blocks": (quad, quart)},
    )


def generate_separable_data(n: int, dim: int, seed: int) -> SeparableDataset:
    """Class-conditional Gaussian rows: label-0 rows centered at -mu, label-1 at +mu.

    The first floor(n/2) labels are 0, the rest 1.  ||mu|| is a module
    constant large enough that mu itself certifies a strict margin with
    overwhelming probability; the generator redraws from the same stream until
    the certificate actually holds, so the returned dataset is always
    separable.  Square designs are also redrawn while the feature matrix is
    nearly singular (condition above _SEPARABLE_MAX_COND), since a benchmark
    with a vanishing eigenvalue measures the conditioning, not the algorithm.
    """
    if n < 2 or dim < 1:
        raise ConfigError("need n >= 2 and dim >= 1")
    labels = np.zeros(n, dtype=int)
    labels[n // 2 :] = 1
    mu = np.full(dim, _SEPARABLE_MEAN_NORM / math.sqrt(dim))

    rng = np.random.default_rng(seed)
    for _ in range(100):
        signs = np.where(labels == 1, 1.0, -1.0)
        features = rng.standard_normal((n, dim)) + signs[:, None] * mu
        margins = signs * (features @ mu)
        if not np.all(margins > 0):
            continue
        if n == dim and np.linalg.cond(features) > _SEPARABLE_MAX_COND:
            continue
        return SeparableDataset(features=features, labels=labels, seed=seed, certificate=mu)
    raise ConfigError(f"could not generate separable data for seed {seed}")


def benchmark_objective(name: str, seed: int, dim: int = 10) -> Objective:
    """Named benchmark problems used by the CLI and the predefined sweeps.

    quadratic / logistic follow the class-conditional construction with
    integer labels as targets; l4 uses a consistent right-hand side so the
    optimum is exact; composite pairs the quadratic block with an l4 block.
    """
    if name == "quadratic":
        ds = generate_separable_data(dim, dim, seed)
        # Columns rescaled over several decades and a consistent right-hand
        # side with a bounded solution: modal energies then scale with the
        # eigenvalues, so rate plots show clean power laws instead of the
        # plateaus a single-scale spectrum produces.
        A = ds.features * np.logspace(0.0, -_QUADRATIC_SCALE_SPAN, dim)
        rng = np.random.default_rng(seed + 1)
        return make_quadratic(A, A @ rng.standard_normal(dim))
    if name == "l4":
        ds = generate_separable_data(dim, dim, seed)
        rng = np.random.default_rng(seed + 1)
        # Modest solution norm keeps the initial residual, and with it the
        # stiffness of the quartic near t=1, small enough that fine reference
        # solves over the audit horizon stay cheap.
        x_star = rng.standard_normal(dim)
        x_star *= 0.5 / np.linalg.norm(x_star)
        return make_lp_regression(ds.features, ds.features @ x_star, power=4)
    if name == "logistic":
        return make_logistic(generate_separable_data(dim, dim, seed))
    if name == "composite":
        ds1 = generate_separable_data(dim, dim, seed)
        ds2 = generate_separable_data(dim, dim, seed + 1)
        return make_composite(
            ds1.features, ds1.labels.astype(float), ds2.features, ds2.labels.astype(float)
        )
    raise ConfigError(f"unknown objective {name!r}")
