"""Assembly of the discrete system.

The scheme at interior node i reads

    eps*theta_i * y_xx,i + A_i * y_x,i = fhat_i + lam * sum_j hbar_j Kmod(xi_i, xi_j) y_j

with y_xx the second difference over the nonuniform triple and y_x the
central first difference.  Rows 0 and n are identity rows imposing the
boundary values, which keeps every vector at full length n+1 and makes the
kernel sum run over all columns j = 0..n exactly as written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import ShishkinMesh
from .problems import ProblemSpec
from .scheme import FittedCoefficients, KernelMatrix


@dataclass(frozen=True)
class TriDiagonal:
    """Differential part alone, boundary identity rows embedded.

    sub[k] sits on row k+1 (length n), diag on rows 0..n (length n+1),
    sup[k] on row k (length n).  Row 0 and row n are (1) on the diagonal
    with zero off-diagonal entries.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        self.sub.setflags(write=False)
        self.diag.setflags(write=False)
        self.sup.setflags(write=False)

    def matvec(self, y: np.ndarray) -> np.ndarray:
        out = self.diag * y
        out[1:] += self.sub * y[:-1]
        out[:-1] += self.sup * y[1:]
        return out


@dataclass(frozen=True)
class DenseSystem:
    """The full (n+1) x (n+1) linear system plus its tridiagonal core.

    matrix = embedded tri minus lam * kernel matrix on interior rows;
    nodes are carried along so solvers can form mesh-aware starting guesses
    and exports know their abscissae.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    tri: TriDiagonal
    nodes: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.rhs.setflags(write=False)
        self.nodes.setflags(write=False)


def assemble(
    mesh: ShishkinMesh,
    coeffs: FittedCoefficients,
    kmat: KernelMatrix,
    problem: ProblemSpec,
    epsilon: float,
) -> DenseSystem:
    """Build matrix and right-hand side from precomputed pieces.

    All inputs must describe the same mesh and epsilon; mismatched array
    lengths raise ValueError before any arithmetic happens.
    """
    n = mesh.n
    if len(coeffs.theta) != n - 1:
        raise ValueError(
            f"coefficients are for {len(coeffs.theta) + 1} cells, mesh has {n}"
        )
    if kmat.entries.shape != (n - 1, n + 1):
        raise ValueError(
            f"kernel matrix has shape {kmat.entries.shape}, "
            f"expected {(n - 1, n + 1)}"
        )

    idx = np.arange(1, n)
    h_i = mesh.steps[idx - 1]
    h_ip1 = mesh.steps[idx]
    hbar = mesh.half_steps[idx]

    lower = epsilon * coeffs.theta / (h_i * hbar) - coeffs.cap_a / (2.0 * hbar)
    center = -epsilon * coeffs.theta * (1.0 / h_i + 1.0 / h_ip1) / hbar
    upper = epsilon * coeffs.theta / (h_ip1 * hbar) + coeffs.cap_a / (2.0 * hbar)

    sub = np.concatenate([lower, [0.0]])
    diag = np.concatenate([[1.0], center, [1.0]])
    sup = np.concatenate([[0.0], upper])
    tri = TriDiagonal(sub=sub, diag=diag, sup=sup)

    matrix = np.zeros((n + 1, n + 1))
    matrix[0, 0] = 1.0
    matrix[n, n] = 1.0
    matrix[idx, idx - 1] = lower
    matrix[idx, idx] = center
    matrix[idx, idx + 1] = upper
    matrix[1:n, :] -= problem.lam * kmat.entries

    rhs = np.empty(n + 1)
    rhs[0] = problem.alpha
    rhs[n] = problem.beta
    rhs[idx] = coeffs.fhat

    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        raise ValueError("assembled system contains non-finite entries")

    return DenseSystem(matrix=matrix, rhs=rhs, tri=tri, nodes=mesh.nodes.copy())
