"""Fitted-mesh solver for singularly perturbed Fredholm integro-differential equations.

Solves epsilon*v'' + a(xi)*v' = f(xi) + lam * integral of K(xi,.)*v over [0, T]
with Dirichlet data, on a piecewise-uniform mesh condensed inside the boundary
layer, using an exponentially fitted second-order difference scheme.
"""

from .mesh import ShishkinMesh, build_shishkin
from .problems import (
    ExactSolution,
    LambdaBoundReport,
    ProblemSpec,
    eval_on_grid,
    eval_on_nodes,
    example1,
    validate_lambda_bound,
    with_numeric_kernel_dxi,
)
from .scheme import (
    FittedCoefficients,
    KernelMatrix,
    NonpositiveThetaError,
    bernoulli,
    compute_chi,
    compute_fitted,
    compute_gamma,
    compute_kernel_matrix,
)
from .assembly import DenseSystem, TriDiagonal, assemble
from .linsolve import (
    NonConvergenceError,
    SingularSystemError,
    SolutionVector,
    fixed_point_solve,
    lu_solve,
    thomas_solve,
)
from .analysis import (
    ConvergenceReport,
    StudyCellError,
    double_mesh_error,
    max_error,
    rate,
    run_study,
    solve_single,
)

__version__ = "0.1.0"

__all__ = [
    "ShishkinMesh",
    "build_shishkin",
    "ProblemSpec",
    "ExactSolution",
    "eval_on_nodes",
    "eval_on_grid",
    "LambdaBoundReport",
    "example1",
    "validate_lambda_bound",
    "with_numeric_kernel_dxi",
    "FittedCoefficients",
    "KernelMatrix",
    "NonpositiveThetaError",
    "bernoulli",
    "compute_chi",
    "compute_gamma",
    "compute_fitted",
    "compute_kernel_matrix",
    "DenseSystem",
    "TriDiagonal",
    "assemble",
    "SolutionVector",
    "SingularSystemError",
    "NonConvergenceError",
    "lu_solve",
    "thomas_solve",
    "fixed_point_solve",
    "ConvergenceReport",
    "StudyCellError",
    "max_error",
    "rate",
    "double_mesh_error",
    "run_study",
    "solve_single",
]
