"""Piecewise-uniform (Shishkin) mesh for convection-diffusion layer problems.

The mesh splits [0, t_end] at a transition point rho = min(t_end/2,
epsilon*ln(n)/a_bar).  Both halves carry n/2 cells each: a fine spacing
h_fine = 2*rho/n inside the layer region [0, rho] and a coarse spacing
h_coarse = 2*(t_end - rho)/n outside.  When epsilon is large enough for
the min to clamp at t_end/2 the mesh degenerates to uniform spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ShishkinMesh:
    """Mesh nodes plus the derived step arrays used by the difference scheme.

    Fields:
        n           mesh parameter (even, >= 4); there are n+1 nodes
        nodes       xi_0 .. xi_n, strictly increasing, nodes[0]=0, nodes[n]=t_end
        steps       h_i = xi_i - xi_{i-1}, length n
        half_steps  hbar_i: trapezoid weights, length n+1; interior entries are
                    (h_i + h_{i+1})/2, the ends are h_1/2 and h_n/2
        rho         transition point
        h_fine      spacing on [0, rho]
        h_coarse    spacing on [rho, t_end]
        t_end       right endpoint
        clamped     True when rho hit the t_end/2 cap (uniform mesh)
    """

    n: int
    nodes: np.ndarray
    steps: np.ndarray
    half_steps: np.ndarray
    rho: float
    h_fine: float
    h_coarse: float
    t_end: float
    clamped: bool

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.steps.setflags(write=False)
        self.half_steps.setflags(write=False)


def build_shishkin(n: int, epsilon: float, a_bar: float, t_end: float) -> ShishkinMesh:
    """Construct the Shishkin mesh.

    Nodes are computed by closed-form products (never repeated addition), the
    midpoint node is assigned rho exactly and the last node t_end exactly, so
    meshes are bit-reproducible and the endpoints carry no accumulation drift.

    Raises ValueError naming the offending argument when n is odd or < 4,
    epsilon is outside (0, 1], or a_bar / t_end are not positive.
    """
    if n < 4 or n % 2 != 0:
        raise ValueError(f"n must be an even integer >= 4, got n={n}")
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got epsilon={epsilon}")
    if a_bar <= 0.0:
        raise ValueError(f"a_bar must be positive, got a_bar={a_bar}")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got t_end={t_end}")

    rho_layer = epsilon * math.log(n) / a_bar
    rho = min(t_end / 2.0, rho_layer)
    clamped = rho == t_end / 2.0

    half = n // 2
    h_fine = 2.0 * rho / n
    h_coarse = 2.0 * (t_end - rho) / n

    i = np.arange(n + 1)
    nodes = np.where(i <= half, i * h_fine, (i - half) * h_coarse + rho)
    nodes[half] = rho
    nodes[n] = t_end

    steps = np.diff(nodes)
    half_steps = np.empty(n + 1)
    half_steps[0] = steps[0] / 2.0
    half_steps[n] = steps[n - 1] / 2.0
    half_steps[1:n] = (steps[:-1] + steps[1:]) / 2.0

    return ShishkinMesh(
        n=n,
        nodes=nodes,
        steps=steps,
        half_steps=half_steps,
        rho=rho,
        h_fine=h_fine,
        h_coarse=h_coarse,
        t_end=t_end,
        clamped=clamped,
    )
