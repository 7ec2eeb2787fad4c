"""Error measurement, convergence rates, and the parameter-study runner.

The study grid follows the usual reporting convention for layer problems:
rows are values of the perturbation parameter, columns are mesh parameters,
each cell holds the max-norm nodal error E, and the rate between a cell and
its doubled-mesh neighbor is log2(E_n / E_2n).  The row-wise maximum gives
the parameter-uniform error line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assembly import assemble
from .linsolve import SolutionVector, fixed_point_solve, lu_solve
from .mesh import ShishkinMesh, build_shishkin
from .problems import ExactSolution, ProblemSpec, validate_lambda_bound
from .scheme import compute_fitted, compute_kernel_matrix

_SOLVERS = ("lu", "fixed-point", "both")


class StudyCellError(RuntimeError):
    """A study cell failed; carries which (epsilon, n) it was."""

    def __init__(self, epsilon: float, n: int, cause: Exception):
        self.epsilon = epsilon
        self.n = n
        super().__init__(f"study cell epsilon={epsilon!r}, n={n} failed: {cause}")


@dataclass(frozen=True)
class ConvergenceReport:
    """Full study result.

    errors and rates are (len(epsilons), len(ns)) arrays; rates hold NaN
    where no doubled mesh exists in ns or an error was non-positive.
    uniform_errors/uniform_rates are the per-column aggregates over epsilon.
    method records how errors were measured ("exact-solution" or
    "double-mesh").  rhos stores the transition point per cell, and
    rho_branch_switched flags epsilon rows whose transition point did not
    stay on one branch of the min across the n sweep; such rows mix two
    mesh regimes and their rates are not comparable.  cross_check_gaps is
    filled only for solver="both".
    """

    epsilons: tuple
    ns: tuple
    errors: np.ndarray
    rates: np.ndarray
    uniform_errors: np.ndarray
    uniform_rates: np.ndarray
    method: str
    rhos: np.ndarray
    rho_branch_switched: tuple
    cross_check_gaps: np.ndarray | None = None


def solve_single(
    problem: ProblemSpec,
    epsilon: float,
    n: int,
    solver: str = "lu",
    tol: float = 1e-12,
    max_iter: int = 200,
):
    """Mesh, assemble, and solve one instance.

    Returns (mesh, solution, gap) where gap is the max-norm difference
    between the direct and iterative solutions for solver="both" and None
    otherwise.  For "both" the returned solution is the direct one.
    """
    if solver not in _SOLVERS:
        raise ValueError(f"solver must be one of {_SOLVERS}, got {solver!r}")
    mesh = build_shishkin(n, epsilon, problem.a_bar, problem.t_end)
    coeffs = compute_fitted(mesh, problem, epsilon)
    kmat = compute_kernel_matrix(mesh, problem, coeffs)
    system = assemble(mesh, coeffs, kmat, problem, epsilon)

    if solver == "lu":
        return mesh, lu_solve(system), None
    if solver == "fixed-point":
        return mesh, fixed_point_solve(system, kmat, problem.lam, tol=tol, max_iter=max_iter), None
    direct = lu_solve(system)
    iterative = fixed_point_solve(system, kmat, problem.lam, tol=tol, max_iter=max_iter)
    gap = float(np.max(np.abs(direct.values - iterative.values)))
    return mesh, direct, gap


def max_error(y: SolutionVector, exact: ExactSolution, mesh: ShishkinMesh, epsilon: float) -> float:
    """Max-norm nodal error against the closed-form solution."""
    vex = exact.on_nodes(mesh.nodes, epsilon)
    if len(vex) != len(y.values):
        raise ValueError(f"length mismatch: {len(vex)} exact vs {len(y.values)} computed")
    return float(np.max(np.abs(vex - y.values)))


def rate(e_n: float, e_2n: float) -> float:
    """log2 of the error ratio; NaN when either error is not positive."""
    if not (e_n > 0.0 and e_2n > 0.0) or not (math.isfinite(e_n) and math.isfinite(e_2n)):
        return math.nan
    return math.log(e_n / e_2n) / math.log(2.0)


def double_mesh_error(
    problem: ProblemSpec,
    epsilon: float,
    n: int,
    solver: str = "lu",
    tol: float = 1e-12,
) -> float:
    """Error estimate by comparing the n-cell and 2n-cell solutions.

    When both meshes share the transition point the coarse nodes are a
    subset of the fine ones and the comparison is exact; otherwise the fine
    solution is brought to the coarse nodes by piecewise-linear
    interpolation, which is consistent with the scheme's order.
    """
    if n % 2 != 0:
        raise ValueError(f"n must be even, got n={n}")
    mesh_c, y_c, _ = solve_single(problem, epsilon, n, solver=solver, tol=tol)
    mesh_f, y_f, _ = solve_single(problem, epsilon, 2 * n, solver=solver, tol=tol)
    if mesh_c.rho == mesh_f.rho:
        fine_at_coarse = y_f.values[::2]
    else:
        fine_at_coarse = np.interp(mesh_c.nodes, mesh_f.nodes, y_f.values)
    return float(np.max(np.abs(y_c.values - fine_at_coarse)))


def run_study(
    problem: ProblemSpec,
    exact: ExactSolution | None,
    epsilon_list: Sequence[float],
    n_list: Sequence[int],
    solver: str = "lu",
    tol: float = 1e-12,
) -> ConvergenceReport:
    """Fill the whole (epsilon, n) error table.

    Uses exact-solution errors when exact is given, the double-mesh
    estimator otherwise.  Cells run in input order and the report preserves
    that order, so repeated runs are reproducible.
    """
    epsilons = tuple(float(e) for e in epsilon_list)
    ns = tuple(int(n) for n in n_list)
    if not epsilons:
        raise ValueError("epsilon_list must not be empty")
    if not ns:
        raise ValueError("n_list must not be empty")
    if any(n % 2 != 0 for n in ns):
        raise ValueError(f"all n must be even, got {ns}")
    if list(ns) != sorted(ns):
        raise ValueError(f"n_list must be ascending, got {ns}")
    if solver not in _SOLVERS:
        raise ValueError(f"solver must be one of {_SOLVERS}, got {solver!r}")

    report = validate_lambda_bound(problem, 256)
    if not report.ok:
        warnings.warn(
            f"|lam|={abs(problem.lam):.4g} is not below the well-posedness "
            f"bound {report.bound:.4g}; results may be meaningless",
            stacklevel=2,
        )

    n_rows, n_cols = len(epsilons), len(ns)
    errors = np.empty((n_rows, n_cols))
    rhos = np.empty((n_rows, n_cols))
    clamped = np.empty((n_rows, n_cols), dtype=bool)
    gaps = np.full((n_rows, n_cols), np.nan) if solver == "both" else None

    for i, eps in enumerate(epsilons):
        for j, n in enumerate(ns):
            try:
                if exact is not None:
                    mesh, y, gap = solve_single(problem, eps, n, solver=solver, tol=tol)
                    errors[i, j] = max_error(y, exact, mesh, eps)
                else:
                    errors[i, j] = double_mesh_error(problem, eps, n, solver=solver, tol=tol)
                    mesh = build_shishkin(n, eps, problem.a_bar, problem.t_end)
                    gap = None
            except Exception as exc:
                raise StudyCellError(eps, n, exc) from exc
            rhos[i, j] = mesh.rho
            clamped[i, j] = mesh.clamped
            if gaps is not None and gap is not None:
                gaps[i, j] = gap

    rates = np.full((n_rows, n_cols), np.nan)
    for j, n in enumerate(ns):
        if 2 * n in ns:
            jj = ns.index(2 * n)
            for i in range(n_rows):
                rates[i, j] = rate(errors[i, j], errors[i, jj])

    uniform_errors = errors.max(axis=0)
    uniform_rates = np.full(n_cols, np.nan)
    for j, n in enumerate(ns):
        if 2 * n in ns:
            jj = ns.index(2 * n)
            uniform_rates[j] = rate(uniform_errors[j], uniform_errors[jj])

    switched = tuple(bool(np.any(clamped[i, :] != clamped[i, 0])) for i in range(n_rows))

    return ConvergenceReport(
        epsilons=epsilons,
        ns=ns,
        errors=errors,
        rates=rates,
        uniform_errors=uniform_errors,
        uniform_rates=uniform_rates,
        method="exact-solution" if exact is not None else "double-mesh",
        rhos=rhos,
        rho_branch_switched=switched,
        cross_check_gaps=gaps,
    )
