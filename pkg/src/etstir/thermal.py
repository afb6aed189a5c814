"""Steady temperature field driven by Joule heating.

Electrodes and the inlet are held at ``T_ref``; the outlet is zero-gradient;
the remaining walls and the cantilever are adiabatic unless
``walls="isothermal"`` is requested.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import SolverError
from .fv import bc_table, face_gradients, fixed_face_sides
from .linalg import direct, five_point_matrix
from .mesh import FaceKind, Grid
from .properties import FluidProps

WALL_MODES = ("adiabatic", "isothermal")


@dataclass(frozen=True, eq=False)
class TemperatureField:
    grid: Grid = field(repr=False)
    t: np.ndarray = field(repr=False)
    T_ref: float
    walls: str = "adiabatic"

    @property
    def dT_max(self) -> float:
        return float(np.max(self.t[self.grid.fluid]) - self.T_ref)

    def dirichlet_values(self) -> dict:
        return _dirichlet(self.T_ref, self.walls)


def _dirichlet(t_ref, walls):
    kinds = [FaceKind.ELECTRODE_A, FaceKind.ELECTRODE_B, FaceKind.INLET]
    if walls == "isothermal":
        kinds += [FaceKind.WALL, FaceKind.REACTIVE]
    return {k: t_ref for k in kinds}


def joule_heating(e, props: FluidProps) -> np.ndarray:
    """Volumetric Joule heat ``sigma |E|^2`` per cell, W/m^3."""
    return props.sigma * e.e2


def _face_velocities(grid, flow):
    if flow is None:
        return np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1))
    return flow.u, flow.v


def solve_temperature(grid: Grid, q: np.ndarray, flow=None,
                      props: FluidProps = FluidProps(), tol: float = 1e-8,
                      walls: str = "adiabatic") -> TemperatureField:
    """Steady advection-diffusion of heat with source ``q``.

    ``flow`` (a :class:`~etstir.flow.FlowField`) advects heat with first-order
    upwinding; pass ``None`` for pure conduction.
    """
    if walls not in WALL_MODES:
        raise ValueError(f"walls must be one of {WALL_MODES}")
    if np.any(q < 0):
        raise ValueError("heat source must be non-negative")
    uf, vf = _face_velocities(grid, flow)
    bc_type, bc_value = bc_table(_dirichlet(props.T_ref, walls), outflow=[FaceKind.OUTLET])
    ap, aw, ae, as_, an, b = kernels.scalar_coefficients(
        grid.fluid, grid.xkind, grid.ykind, bc_type, bc_value, uf, vf,
        props.k_thermal, props.rho * props.cp, grid.dx, grid.dy)
    b = b + np.where(grid.fluid, q, 0.0) * grid.cell_area
    b[~grid.fluid] = props.T_ref
    a = five_point_matrix(ap, aw, ae, as_, an)
    rhs = b.ravel()
    t = direct(a, rhs)
    res = float(np.linalg.norm(rhs - a @ t) / np.linalg.norm(rhs))
    if res > tol:
        raise SolverError(f"temperature residual {res:.3e} above tolerance {tol:.1e}",
                          residual=res)
    return TemperatureField(grid, t.reshape(grid.shape), props.T_ref, walls)


def energy_balance(temp: TemperatureField, q: np.ndarray, flow=None,
                   props: FluidProps = FluidProps()) -> dict:
    """Global steady heat budget per unit depth (W/m), relative to ``T_ref``.

    ``residual`` is ``(source - conducted_out - advected_out) / source``.
    """
    grid = temp.grid
    t = temp.t
    dirichlet = temp.dirichlet_values()
    gx, gy = face_gradients(t, grid, dirichlet)
    k = props.k_thermal
    sx, sy = fixed_face_sides(grid)
    conducted = 0.0
    # outward conductive flux through fixed-temperature faces is k * side * grad
    for kind in dirichlet:
        mx = grid.xkind == kind
        my = grid.ykind == kind
        conducted += k * grid.dy * float(np.sum((sx * gx)[mx]))
        conducted += k * grid.dx * float(np.sum((sy * gy)[my]))
    uf, _ = _face_velocities(grid, flow)
    rc = props.rho * props.cp
    out = grid.xkind[-1] == FaceKind.OUTLET
    advected = rc * grid.dy * float(np.sum(uf[-1][out] * (t[-1][out] - props.T_ref)))
    source = float(np.sum(q[grid.fluid])) * grid.cell_area
    residual = (source - conducted - advected) / source if source > 0 else 0.0
    return {"source": source, "conducted_out": conducted, "advected_out": advected,
            "residual": residual}
