"""Problem definitions for the integro-differential boundary value problem

    epsilon*v'' + a(xi)*v' = f(xi) + lam * integral_0^T K(xi, eta) v(eta) d(eta)

on [0, t_end] with v(0) = alpha, v(t_end) = beta.  The perturbation parameter
epsilon is deliberately not part of the problem data; it is supplied at solve
time so one ProblemSpec serves a whole parameter study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_A_CHECK_POINTS = 1024


def eval_on_nodes(fn: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate a scalar function of xi on an array of nodes.

    Tries the vectorized call first; functions written with plain math
    operators on scalars are picked up by the fallback loop.
    """
    x = np.asarray(x, dtype=float)
    try:
        out = np.asarray(fn(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(v))) for v in x.ravel()]).reshape(x.shape)


def eval_on_grid(fn: Callable, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate a scalar function of (xi, eta) on the outer grid x[:,None], y[None,:]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = x[:, None]
    Y = y[None, :]
    try:
        out = np.asarray(fn(X, Y), dtype=float)
        if out.shape == (len(x), len(y)):
            return out
    except (TypeError, ValueError):
        pass
    out = np.empty((len(x), len(y)))
    for i, xv in enumerate(x):
        for j, yv in enumerate(y):
            out[i, j] = float(fn(float(xv), float(yv)))
    return out


@dataclass(frozen=True)
class ProblemSpec:
    """One problem instance.

    Fields:
        a           convection coefficient a(xi), must satisfy a >= a_bar > 0
        f           source term f(xi)
        kernel      K(xi, eta)
        kernel_dxi  dK/dxi(xi, eta); use :func:`with_numeric_kernel_dxi` when
                    only K is available
        lam         coupling constant of the integral term
        alpha       left boundary value v(0)
        beta        right boundary value v(t_end)
        t_end       domain length T
        a_bar       certified lower bound of a on [0, t_end]

    The function fields must be pure: same inputs, same outputs, no hidden
    state.  Construction spot-checks a >= a_bar on a 1024-point grid; a_bar
    itself is user-certified, not inferred.
    """

    a: Callable
    f: Callable
    kernel: Callable
    kernel_dxi: Callable
    lam: float
    alpha: float
    beta: float
    t_end: float
    a_bar: float

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got t_end={self.t_end}")
        if self.a_bar <= 0.0:
            raise ValueError(f"a_bar must be positive, got a_bar={self.a_bar}")
        sample = np.linspace(0.0, self.t_end, _A_CHECK_POINTS)
        avals = eval_on_nodes(self.a, sample)
        if not np.all(avals >= self.a_bar * (1.0 - 1e-12)):
            bad = sample[int(np.argmin(avals))]
            raise ValueError(
                f"a(xi) drops below a_bar={self.a_bar} near xi={bad:.6g} "
                f"(a={np.min(avals):.6g})"
            )


def with_numeric_kernel_dxi(
    a: Callable,
    f: Callable,
    kernel: Callable,
    lam: float,
    alpha: float,
    beta: float,
    t_end: float,
    a_bar: float,
) -> ProblemSpec:
    """Build a ProblemSpec when only K itself is known.

    dK/dxi is synthesized by central differences with step
    max(1e-6, 1e-6*t_end).  Prefer the analytic derivative when you have it;
    the scheme consumes dK/dxi directly and the numeric version limits the
    achievable accuracy near machine precision.
    """
    step = max(1e-6, 1e-6 * t_end)

    def kernel_dxi(x, eta):
        return (kernel(x + step, eta) - kernel(x - step, eta)) / (2.0 * step)

    return ProblemSpec(
        a=a, f=f, kernel=kernel, kernel_dxi=kernel_dxi,
        lam=lam, alpha=alpha, beta=beta, t_end=t_end, a_bar=a_bar,
    )


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution v(xi; epsilon), for problems that have one."""

    eval: Callable

    def on_nodes(self, x: np.ndarray, epsilon: float) -> np.ndarray:
        return eval_on_nodes(lambda xi: self.eval(xi, epsilon), x)


@dataclass(frozen=True)
class LambdaBoundReport:
    """Result of the smallness check |lam| < a_bar / (k_bar * t_end)."""

    k_bar: float
    bound: float
    ok: bool


def _example1_constants(epsilon: float) -> tuple[float, float]:
    """The two constants of the closed-form solution.

    1 - exp(-2/eps) is computed as -expm1(-2/eps): for tiny eps the direct
    exponential underflows and the difference becomes exactly 1 without any
    cancellation on the way there.
    """
    e = math.e
    exp2e = math.exp(-2.0 / epsilon)
    one_minus = -math.expm1(-2.0 / epsilon)
    num = (3.0 + epsilon - e) * (2.0 - 2.0 * e + epsilon * one_minus) \
        + (2.0 + epsilon) * (exp2e - 1.0)
    den = 4.0 * e * (2.0 + epsilon) ** 2 * (exp2e - 1.0) \
        - (4.0 * e + epsilon * e - 2.0 * e * e) \
        + (2.0 + epsilon * e) * exp2e
    d1 = num / den
    d2 = 1.0 + (d1 - 1.0) * (e - 1.0) / (2.0 + epsilon)
    return d1, d2


def example1() -> tuple[ProblemSpec, ExactSolution]:
    """The benchmark problem used throughout the convergence experiments.

    a = 2, f(xi) = e^xi, K(xi, eta) = e^(xi - eta), lam = -1/4, v(0) = 0,
    v(1) = 1, with a known closed-form solution combining a smooth part and
    a boundary layer term e^(-2 xi / epsilon).
    """
    problem = ProblemSpec(
        a=lambda x: 2.0 + 0.0 * np.asarray(x),
        f=np.exp,
        kernel=lambda x, eta: np.exp(np.asarray(x) - np.asarray(eta)),
        kernel_dxi=lambda x, eta: np.exp(np.asarray(x) - np.asarray(eta)),
        lam=-0.25,
        alpha=0.0,
        beta=1.0,
        t_end=1.0,
        a_bar=2.0,
    )

    def eval_exact(x, epsilon):
        d1, d2 = _example1_constants(epsilon)
        x = np.asarray(x, dtype=float)
        layer = np.expm1(-2.0 * x / epsilon) / np.expm1(-2.0 / epsilon)
        return ((d1 - 1.0) / (2.0 + epsilon)) * (1.0 - np.exp(x)) + d2 * layer

    return problem, ExactSolution(eval=eval_exact)


def validate_lambda_bound(p: ProblemSpec, quad_panels: int) -> LambdaBoundReport:
    """Check the well-posedness smallness condition on the coupling constant.

    k_bar approximates max over xi of integral_0^T |K(xi, eta)| d(eta) by the
    composite trapezoid rule on a uniform (quad_panels+1)-point sample in both
    variables.  ok is advisory: the solvers proceed either way, the iterative
    one just loses its contraction guarantee when ok is False.
    """
    if quad_panels < 16:
        raise ValueError(f"quad_panels must be >= 16, got {quad_panels}")
    grid = np.linspace(0.0, p.t_end, quad_panels + 1)
    kvals = np.abs(eval_on_grid(p.kernel, grid, grid))
    weights = np.full(quad_panels + 1, p.t_end / quad_panels)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    k_bar = float(np.max(kvals @ weights))
    if k_bar == 0.0:
        return LambdaBoundReport(k_bar=0.0, bound=math.inf, ok=True)
    bound = p.a_bar / (k_bar * p.t_end)
    return LambdaBoundReport(k_bar=k_bar, bound=bound, ok=abs(p.lam) < bound)
