"""RMS electrostatic potential and field.

The time-averaged electrothermal force only needs the rms field, so the
potential obeys Laplace's equation with the two electrodes held at
``+v_rms/2`` (A) and ``-v_rms/2`` (B). Every other boundary, including the
cantilever, is an insulator.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .fv import bc_table, face_gradients
from .linalg import five_point_matrix, pcg
from .mesh import FaceKind, Grid


@dataclass(frozen=True, eq=False)
class PotentialField:
    grid: Grid = field(repr=False)
    phi: np.ndarray = field(repr=False)
    v_a: float
    v_b: float

    @property
    def electrode_values(self) -> dict:
        return {FaceKind.ELECTRODE_A: self.v_a, FaceKind.ELECTRODE_B: self.v_b}


@dataclass(frozen=True, eq=False)
class EField:
    """Face-normal field components and the cell-averaged ``|E|^2``."""

    grid: Grid = field(repr=False)
    ex: np.ndarray = field(repr=False)
    ey: np.ndarray = field(repr=False)
    e2: np.ndarray = field(repr=False)

    @property
    def magnitude(self) -> np.ndarray:
        return np.sqrt(self.e2)


def solve_potential(grid: Grid, v_rms: float, tol: float = 1e-8,
                    maxiter: int = 50_000) -> PotentialField:
    """Solve the discrete Laplace equation for the electrode pair.

    Raises :class:`~etstir.errors.SolverError` if conjugate gradients does
    not reach ``tol`` (relative residual) within ``maxiter`` iterations.
    """
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    va, vb = 0.5 * v_rms, -0.5 * v_rms
    if v_rms == 0:
        return PotentialField(grid, np.zeros(grid.shape), va, vb)
    bc_type, bc_value = bc_table({FaceKind.ELECTRODE_A: va, FaceKind.ELECTRODE_B: vb})
    zx = np.zeros((grid.nx + 1, grid.ny))
    zy = np.zeros((grid.nx, grid.ny + 1))
    ap, aw, ae, as_, an, b = kernels.scalar_coefficients(
        grid.fluid, grid.xkind, grid.ykind, bc_type, bc_value, zx, zy,
        1.0, 0.0, grid.dx, grid.dy)
    a = five_point_matrix(ap, aw, ae, as_, an)
    phi = pcg(a, b.ravel(), tol, maxiter=maxiter).reshape(grid.shape)
    phi = np.where(grid.fluid, phi, 0.0)
    return PotentialField(grid, phi, va, vb)


def electric_field(phi: PotentialField, grid: Grid | None = None) -> EField:
    """``E = -grad(phi)`` on faces; ``|E|^2`` averages squared face components."""
    grid = grid or phi.grid
    gx, gy = face_gradients(phi.phi, grid, phi.electrode_values)
    ex, ey = -gx, -gy
    e2 = 0.5 * (ex[:-1] ** 2 + ex[1:] ** 2) + 0.5 * (ey[:, :-1] ** 2 + ey[:, 1:] ** 2)
    e2 = np.where(grid.fluid, e2, 0.0)
    return EField(grid, ex, ey, e2)
