"""Two independent solution paths for the assembled system.

lu_solve is the authoritative one: dense LU with partial pivoting on the
full matrix.  fixed_point_solve never factors the dense matrix at all; it
lags the integral term and solves only the tridiagonal core each sweep,
which converges precisely because the continuous problem's smallness
condition makes that lag a contraction.  Agreement between the two is the
strongest internal check this package has, so neither path is allowed to
reuse the other's linear algebra on the dense system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import DenseSystem, TriDiagonal
from .scheme import KernelMatrix

_RESIDUAL_TOL = 1e-10
_PIVOT_FLOOR = 1e-300


class SingularSystemError(RuntimeError):
    """LU hit an exactly zero pivot; carries the pivot index."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"system is singular: zero pivot at index {pivot_index}")


class NonConvergenceError(RuntimeError):
    """Fixed-point sweep failed to reach tol; carries the last state."""

    def __init__(self, message: str, last_iterate: np.ndarray, last_increment: float):
        self.last_iterate = last_iterate
        self.last_increment = last_increment
        super().__init__(message)


@dataclass(frozen=True)
class SolutionVector:
    """Discrete solution y_0..y_n plus a record of how it was produced.

    solver_tag is "lu" or "fixed-point"; iterations is None for the direct
    path.  diagnostics carries solver-specific extras (reciprocal pivot
    growth, final residual, warnings).
    """

    values: np.ndarray
    solver_tag: str
    iterations: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)


def lu_solve(system: DenseSystem) -> SolutionVector:
    """Direct solve by LU with partial pivoting.

    Post-solve the boundary entries are reset to rhs[0], rhs[n]: the identity
    rows make those values exact in real arithmetic and the reset removes the
    roundoff that pivoting smears into them.  The normwise backward error
    |Ay - b| / (|A| |y| + |b|) in max norms is checked against 1e-10; a
    violation attaches an ill-conditioning warning to the result instead of
    failing, since the solution may still be the best available.  (A residual
    scaled by |b| alone would be useless here: interior rows of the fitted
    operator carry entries of size eps/h^2, which reach 1e10 on layer meshes,
    so their roundoff dwarfs |b| even for perfectly stable solves.)
    """
    a = system.matrix
    b = system.rhs
    m = a.shape[0]
    if a.shape != (m, m) or b.shape != (m,):
        raise ValueError(f"system shapes {a.shape}, {b.shape} are not square/compatible")

    with warnings.catch_warnings():
        # exact singularity is detected from the U diagonal below and raised
        # as our own error; scipy's advance warning is redundant noise
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    udiag = np.abs(np.diag(lu))
    if np.any(udiag == 0.0):
        raise SingularSystemError(int(np.flatnonzero(udiag == 0.0)[0]))

    y = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    y[0] = b[0]
    y[-1] = b[-1]

    # reciprocal pivot growth: max|A| / max|U|, near zero flags instability
    max_a = float(np.max(np.abs(a)))
    max_u = float(np.max(np.abs(np.triu(lu))))
    rpg = max_a / max_u if max_u > 0.0 else 0.0

    scale = float(np.max(np.abs(a)) * np.max(np.abs(y)) + np.max(np.abs(b)))
    residual = float(np.max(np.abs(a @ y - b))) / scale if scale > 0.0 else 0.0
    diagnostics = {"reciprocal_pivot_growth": rpg, "residual": residual}
    if residual > _RESIDUAL_TOL:
        diagnostics["warning"] = (
            f"backward error {residual:.3e} exceeds {_RESIDUAL_TOL:.0e}; "
            f"the system looks ill-conditioned"
        )

    return SolutionVector(values=y, solver_tag="lu", diagnostics=diagnostics)


def thomas_solve(tri: TriDiagonal, rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal forward elimination and back substitution.

    No pivoting; if an eliminated diagonal entry falls below 1e-300 in
    magnitude the routine falls back to dense LU on the tridiagonal matrix
    alone, which handles the (never yet observed) degenerate case without
    corrupting the fast path.
    """
    m = len(tri.diag)
    c = np.empty(m)
    d = np.empty(m)
    piv = tri.diag[0]
    if abs(piv) < _PIVOT_FLOOR:
        return _thomas_fallback(tri, rhs)
    c[0] = tri.sup[0] / piv
    d[0] = rhs[0] / piv
    for k in range(1, m):
        piv = tri.diag[k] - tri.sub[k - 1] * c[k - 1]
        if abs(piv) < _PIVOT_FLOOR:
            return _thomas_fallback(tri, rhs)
        c[k] = tri.sup[k] / piv if k < m - 1 else 0.0
        d[k] = (rhs[k] - tri.sub[k - 1] * d[k - 1]) / piv
    y = np.empty(m)
    y[m - 1] = d[m - 1]
    for k in range(m - 2, -1, -1):
        y[k] = d[k] - c[k] * y[k + 1]
    return y


def _thomas_fallback(tri: TriDiagonal, rhs: np.ndarray) -> np.ndarray:
    m = len(tri.diag)
    a = np.zeros((m, m))
    np.fill_diagonal(a, tri.diag)
    a[np.arange(1, m), np.arange(m - 1)] = tri.sub
    a[np.arange(m - 1), np.arange(1, m)] = tri.sup
    return scipy.linalg.solve(a, rhs)


def fixed_point_solve(
    system: DenseSystem,
    kmat: KernelMatrix,
    lam: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> SolutionVector:
    """Lagged-kernel iteration: y_(k+1) = TriSolve(fhat + lam * K y_(k)).

    Starts from the straight line through the boundary values and stops when
    the max-norm increment drops to tol.  Raises NonConvergenceError, with
    the last iterate and increment attached, when max_iter sweeps are not
    enough or the iterate stops being finite; both indicate the coupling
    constant violates the smallness condition.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    nodes = system.nodes
    m = len(nodes)
    n = m - 1
    alpha = system.rhs[0]
    beta = system.rhs[n]
    span = nodes[-1] - nodes[0]
    y = alpha + (beta - alpha) * (nodes - nodes[0]) / span

    if lam == 0.0 or not np.any(kmat.entries):
        # the sweep map no longer depends on y, so its first application
        # already is the fixed point
        y = thomas_solve(system.tri, system.rhs)
        return SolutionVector(
            values=y,
            solver_tag="fixed-point",
            iterations=1,
            diagnostics={"final_increment": 0.0},
        )

    sweep_rhs = np.empty(m)
    sweep_rhs[0] = alpha
    sweep_rhs[n] = beta
    increment = np.inf
    for sweep in range(1, max_iter + 1):
        sweep_rhs[1:n] = system.rhs[1:n] + lam * (kmat.entries @ y)
        y_next = thomas_solve(system.tri, sweep_rhs)
        increment = float(np.max(np.abs(y_next - y)))
        y = y_next
        if not np.isfinite(increment):
            raise NonConvergenceError(
                f"iterate became non-finite at sweep {sweep}; "
                f"|lam| likely violates the contraction bound",
                last_iterate=y,
                last_increment=increment,
            )
        if increment <= tol:
            return SolutionVector(
                values=y,
                solver_tag="fixed-point",
                iterations=sweep,
                diagnostics={"final_increment": increment},
            )

    raise NonConvergenceError(
        f"no convergence in {max_iter} sweeps (last increment {increment:.3e}); "
        f"|lam| likely violates the contraction bound",
        last_iterate=y,
        last_increment=increment,
    )
