"""Fitted difference coefficients.

Every coefficient of the scheme is an exponentially weighted average taken
against the local two-sided basis function

    psi_i(xi) = (e^(a_i (xi - xi_{i-1})/eps) - 1) / (e^(a_i h_i/eps) - 1)      on (xi_{i-1}, xi_i),
    psi_i(xi) = (1 - e^(-a_i (xi_{i+1} - xi)/eps)) / (1 - e^(-a_i h_{i+1}/eps)) on (xi_i, xi_{i+1}).

With sigma_i = a_i h_i / eps and sigma_{i+1} = a_i h_{i+1} / eps the closed
forms reduce to three one-argument kernels:

    B(t) = t / (e^t - 1)          Bernoulli function
    W(t) = (1 - B(t)) / t         so chi1 = (h_i/hbar_i) W(sigma_i)
                                  and chi2 = (h_{i+1}/hbar_i)(1 - W(sigma_{i+1}))
    G(t) = (1 + t/2) B(t) - 1     so gamma1 = (eps/a_i)^2/hbar_i * G(sigma_i)
                                  and gamma2 = -(eps/a_i)^2/hbar_i * G(-sigma_{i+1})

The W and G forms are plain algebra on the textbook expressions
chi1 = hbar^-1 [eps/a - h_i/(e^sigma - 1)] and the corresponding bracketed
gamma formulas (the absolute xi_{i-1}, xi_{i+1} terms cancel), but they are
much better behaved: evaluating the brackets directly loses all significant
digits once sigma is small, while W and G have clean series there.  As a
bonus chi1 + chi2 = 1 holds exactly in floating point on uniform spacing,
since the two terms share the literal value W(sigma).

All three kernels are evaluated branch-by-branch on masked subsets, so no
exp ever sees an argument beyond +-700 and nothing overflows for any
epsilon in (0, 1] on any mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import ShishkinMesh
from .problems import ProblemSpec, eval_on_grid, eval_on_nodes

# |t| below this: first-order series; above _EXP_CAP: asymptotic limits.
_SERIES_EPS = 1e-8
_EXP_CAP = 700.0


class NonpositiveThetaError(RuntimeError):
    """The fitting factor theta came out <= 0 somewhere.

    The stability theory behind the scheme needs theta > 0; rather than
    silently producing an unstable stencil the coefficient builder stops and
    names the node.
    """


def _bernoulli_array(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    tiny = np.abs(t) < _SERIES_EPS
    big = t > _EXP_CAP
    neg = t < -_EXP_CAP
    mid = ~(tiny | big | neg)
    out[tiny] = 1.0 - 0.5 * t[tiny]
    out[big] = 0.0
    out[neg] = -t[neg]
    tm = t[mid]
    out[mid] = tm / np.expm1(tm)
    out[np.isnan(t)] = np.nan
    return out


def bernoulli(t):
    """B(t) = t/(e^t - 1), finite for every finite t.

    Branches: |t| < 1e-8 uses the series 1 - t/2; t > 700 returns 0
    (the true value is below 1e-300); t < -700 returns -t (e^t vanishes);
    everything else goes through expm1.  NaN propagates.
    """
    arr = _bernoulli_array(np.atleast_1d(t))
    return float(arr[0]) if np.isscalar(t) or np.ndim(t) == 0 else arr


def _w_array(t: np.ndarray) -> np.ndarray:
    """W(t) = (1 - B(t))/t, the mean of psi over the fine-side subinterval.

    W(0) = 1/2, W decays like 1/t for large positive t and approaches
    (1 + t)/t for large negative t.  On |t| < 0.5 the numerator
    1 - B(t) = (expm1(t) - t)/expm1(t) is summed term by term
    (sum of t^n/n! from n = 2) to dodge the cancellation.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    tiny = np.abs(t) < _SERIES_EPS
    small = ~tiny & (np.abs(t) < 0.5)
    big = t > _EXP_CAP
    neg = t < -_EXP_CAP
    rest = ~(tiny | small | big | neg)
    out[tiny] = 0.5 - t[tiny] / 12.0
    if np.any(small):
        ts = t[small]
        term = ts.copy()
        s = np.zeros_like(ts)
        for n in range(2, 30):
            term = term * ts / n
            s = s + term
        out[small] = s / (ts * np.expm1(ts))
    out[big] = 1.0 / t[big]
    out[neg] = (1.0 + t[neg]) / t[neg]
    tr = t[rest]
    out[rest] = (1.0 - tr / np.expm1(tr)) / tr
    out[np.isnan(t)] = np.nan
    return out


def _g_array(t: np.ndarray) -> np.ndarray:
    """G(t) = (1 + t/2) B(t) - 1 = (t + t^2/2 - expm1(t)) / expm1(t).

    Series G(t) = -t^2/6 + t^3/24 - ...; for large positive t the limit is
    -1 and for large negative t the expm1 becomes -1 exactly, leaving the
    polynomial -(t + t^2/2) - 1.  That polynomial stays finite for every
    sigma this package can produce (sigma^2 tops out near 1e30).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    tiny = np.abs(t) < _SERIES_EPS
    small = ~tiny & (np.abs(t) < 0.25)
    big = t > _EXP_CAP
    neg = t < -_EXP_CAP
    rest = ~(tiny | small | big | neg)
    tt = t[tiny]
    out[tiny] = -tt * tt / 6.0 * (1.0 - tt / 4.0)
    if np.any(small):
        ts = t[small]
        term = ts * ts / 2.0
        s = np.zeros_like(ts)
        for n in range(3, 40):
            term = term * ts / n
            s = s + term
        out[small] = -s / np.expm1(ts)
    out[big] = -1.0
    tn = t[neg]
    out[neg] = -(tn + tn * tn / 2.0) - 1.0
    tr = t[rest]
    e = np.expm1(tr)
    out[rest] = (tr + tr * tr / 2.0 - e) / e
    out[np.isnan(t)] = np.nan
    return out


def compute_chi(i: int, mesh: ShishkinMesh, a_i: float, epsilon: float) -> tuple[float, float]:
    """Weights of the backward and forward difference at interior node i.

    chi1 + chi2 = 1 on uniformly spaced triples; as sigma grows chi1 tends
    to 0 and chi2 to h_{i+1}/hbar_i, the upwind degeneration.
    """
    if not 1 <= i <= mesh.n - 1:
        raise IndexError(f"interior node index must lie in 1..{mesh.n - 1}, got {i}")
    h_i = mesh.steps[i - 1]
    h_ip1 = mesh.steps[i]
    hbar = mesh.half_steps[i]
    sig = np.array([a_i * h_i / epsilon, a_i * h_ip1 / epsilon])
    w = _w_array(sig)
    chi1 = (h_i / hbar) * w[0]
    chi2 = (h_ip1 / hbar) * (1.0 - w[1])
    return float(chi1), float(chi2)


def compute_gamma(i: int, mesh: ShishkinMesh, a_i: float, epsilon: float) -> tuple[float, float]:
    """First-moment weights (integrals of (xi - xi_i) psi_i) at interior node i."""
    if not 1 <= i <= mesh.n - 1:
        raise IndexError(f"interior node index must lie in 1..{mesh.n - 1}, got {i}")
    h_i = mesh.steps[i - 1]
    h_ip1 = mesh.steps[i]
    hbar = mesh.half_steps[i]
    scale = (epsilon / a_i) ** 2 / hbar
    g = _g_array(np.array([a_i * h_i / epsilon, -a_i * h_ip1 / epsilon]))
    return float(scale * g[0]), float(-scale * g[1])


@dataclass(frozen=True)
class FittedCoefficients:
    """Scheme coefficients per interior node i = 1..n-1 (arrays of length n-1).

    cap_a is ahat1 + ahat2 as stored; theta is the fitting factor multiplying
    the second difference; fhat the quadrature-averaged right-hand side.
    """

    chi1: np.ndarray
    chi2: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    ahat1: np.ndarray
    ahat2: np.ndarray
    theta: np.ndarray
    cap_a: np.ndarray
    fhat: np.ndarray

    def __post_init__(self):
        for name in ("chi1", "chi2", "gamma1", "gamma2",
                     "ahat1", "ahat2", "theta", "cap_a", "fhat"):
            getattr(self, name).setflags(write=False)


def compute_fitted(mesh: ShishkinMesh, problem: ProblemSpec, epsilon: float) -> FittedCoefficients:
    """All fitted coefficients for one (mesh, problem, epsilon) combination.

    a and f enter through their nodal values and the forward difference
    quotients (a_{i+1} - a_i)/h_{i+1}, (f_{i+1} - f_i)/h_{i+1}; no analytic
    derivatives are consumed.  Raises NonpositiveThetaError if the fitting
    factor loses positivity, and ValueError naming the node if the problem
    functions return NaN.
    """
    n = mesh.n
    nodes = mesh.nodes
    avals = eval_on_nodes(problem.a, nodes)
    fvals = eval_on_nodes(problem.f, nodes)
    for name, vals in (("a", avals), ("f", fvals)):
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise ValueError(
                f"{name}(xi) returned a non-finite value at node {bad} "
                f"(xi={nodes[bad]!r})"
            )

    idx = np.arange(1, n)
    a_i = avals[idx]
    h_i = mesh.steps[idx - 1]
    h_ip1 = mesh.steps[idx]
    hbar = mesh.half_steps[idx]

    sig_back = a_i * h_i / epsilon
    sig_fwd = a_i * h_ip1 / epsilon
    w_back = _w_array(sig_back)
    w_fwd = _w_array(sig_fwd)
    chi1 = (h_i / hbar) * w_back
    chi2 = (h_ip1 / hbar) * (1.0 - w_fwd)

    moment_scale = (epsilon / a_i) ** 2 / hbar
    gamma1 = moment_scale * _g_array(sig_back)
    gamma2 = -moment_scale * _g_array(-sig_fwd)

    a_fwd_diff = (avals[idx + 1] - a_i) / h_ip1
    f_fwd_diff = (fvals[idx + 1] - fvals[idx]) / h_ip1
    ahat1 = a_i * chi1 + a_fwd_diff * gamma1
    ahat2 = a_i * chi2 + a_fwd_diff * gamma2
    theta = 1.0 - ahat1 * h_ip1 / (2.0 * epsilon) + ahat2 * h_i / (2.0 * epsilon)
    cap_a = ahat1 + ahat2
    fhat = fvals[idx] * (chi1 + chi2) + f_fwd_diff * (gamma1 + gamma2)

    if not np.all(theta > 0.0):
        bad = int(idx[np.argmin(theta)])
        raise NonpositiveThetaError(
            f"theta={np.min(theta):.6g} at node {bad} (xi={nodes[bad]:.6g}, "
            f"epsilon={epsilon:.6g}, n={n}); the fitted stencil is not "
            f"stable on this mesh"
        )

    return FittedCoefficients(
        chi1=chi1, chi2=chi2, gamma1=gamma1, gamma2=gamma2,
        ahat1=ahat1, ahat2=ahat2, theta=theta, cap_a=cap_a, fhat=fhat,
    )


@dataclass(frozen=True)
class KernelMatrix:
    """Trapezoid-weighted modified kernel, rows i = 1..n-1, columns j = 0..n.

    entries[i-1][j] = hbar_j * [K(xi_i, xi_j) (chi1_i + chi2_i)
                                + dK/dxi(xi_i, xi_j) (gamma1_i + gamma2_i)]
    """

    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)


def compute_kernel_matrix(
    mesh: ShishkinMesh, problem: ProblemSpec, coeffs: FittedCoefficients
) -> KernelMatrix:
    """Quadrature matrix of the integral term, ready to multiply nodal vectors.

    The coefficients must come from the same mesh and epsilon; the kernel is
    averaged with the same chi/gamma weights as the differential part, and
    each column j carries the composite-trapezoid weight hbar_j (both
    endpoint columns included).
    """
    n = mesh.n
    if len(coeffs.chi1) != n - 1:
        raise ValueError(
            f"coefficient arrays have length {len(coeffs.chi1)}, "
            f"expected {n - 1} for this mesh"
        )
    interior = mesh.nodes[1:n]
    kvals = eval_on_grid(problem.kernel, interior, mesh.nodes)
    kdx = eval_on_grid(problem.kernel_dxi, interior, mesh.nodes)
    chi_sum = (coeffs.chi1 + coeffs.chi2)[:, None]
    gamma_sum = (coeffs.gamma1 + coeffs.gamma2)[:, None]
    entries = (kvals * chi_sum + kdx * gamma_sum) * mesh.half_steps[None, :]
    return KernelMatrix(entries=entries)
