"""Steady incompressible 2-D flow on the staggered (MAC) grid.

``u`` lives on x-faces, ``v`` on y-faces, ``p`` in cells. Momentum uses
central viscous fluxes and first-order upwind convection; the discrete
momentum and continuity equations are solved together as one sparse
saddle-point system. The convective nonlinearity is handled by Picard
(Oseen) iteration on the advecting velocity, under-relaxed between sweeps.

Boundary conditions: parabolic inflow with the requested mean at ``x = 0``;
at the outlet the normal velocity is zero-gradient and the pressure outside
the last cell is zero; no-slip on walls, electrodes and the cantilever.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import SolverError
from .etforce import BodyForceField
from .fv import bc_table, divergence
from .linalg import factorize, five_point_matrix
from .mesh import FaceKind, Grid
from .properties import FluidProps

# link kinds on the staggered sub-grids reuse the cell-grid codes
_LINK_COUPLED = FaceKind.INTERIOR
_LINK_WALL = FaceKind.WALL
_LINK_OUT = FaceKind.OUTLET
_BC_TYPE, _BC_VALUE = bc_table({FaceKind.WALL: 0.0}, outflow=[FaceKind.OUTLET])


@dataclass(frozen=True, eq=False)
class FlowField:
    grid: Grid = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    inlet_mean: float = 0.0
    iterations: int = 0
    residual_history: tuple = ()

    def cell_velocity(self) -> tuple[np.ndarray, np.ndarray]:
        uc = 0.5 * (self.u[:-1] + self.u[1:])
        vc = 0.5 * (self.v[:, :-1] + self.v[:, 1:])
        return uc, vc

    def speed(self) -> np.ndarray:
        uc, vc = self.cell_velocity()
        return np.where(self.grid.fluid, np.hypot(uc, vc), 0.0)

    @property
    def u_max(self) -> float:
        """Largest cell-centred speed, m/s."""
        return float(self.speed().max())

    @property
    def v_down_max(self) -> float:
        """Largest downward (-y) face velocity, m/s."""
        return float(max(0.0, -self.v.min()))

    def volume_flux(self) -> tuple[float, float]:
        """Inlet and outlet volumetric flux per unit depth, m^2/s."""
        dy = self.grid.dy
        return float(self.u[0].sum() * dy), float(self.u[-1].sum() * dy)

    def divergence(self) -> np.ndarray:
        return divergence(self.u, self.v, self.grid)

    def scaled_divergence(self) -> float:
        """``max |div V| * min(dx, dy) / U`` with ``U`` the inlet mean
        (or the peak speed when there is no inflow)."""
        scale = self.inlet_mean if self.inlet_mean > 0 else max(self.u_max, 1e-300)
        h = min(self.grid.dx, self.grid.dy)
        return float(np.abs(self.divergence()).max() * h / scale)


def inlet_profile(grid: Grid, inlet_mean: float) -> np.ndarray:
    """Parabolic inflow at cell-centre heights, scaled to carry exactly
    ``inlet_mean * channel_height`` per unit depth."""
    h = grid.geometry.channel_height
    y = grid.yc
    prof = y * (h - y)
    prof = np.where(grid.xkind[0] == FaceKind.INLET, prof, 0.0)
    total = prof.sum() * grid.dy
    if total == 0 or inlet_mean == 0:
        return np.zeros(grid.ny)
    return prof * (inlet_mean * h / total)


class _Layout:
    """Index bookkeeping for the staggered unknowns of one grid."""

    def __init__(self, grid: Grid):
        nx, ny = grid.nx, grid.ny
        self.grid = grid
        xk, yk = grid.xkind, grid.ykind
        self.u_active = (xk == FaceKind.INTERIOR) | (xk == FaceKind.OUTLET)
        self.v_active = yk == FaceKind.INTERIOR
        self.nu = (nx + 1) * ny
        self.nv = nx * (ny + 1)
        self.np_ = nx * ny

        # u sub-grid links
        uxl = np.full((nx + 2, ny), _LINK_COUPLED, dtype=np.int8)
        uxl[0] = _LINK_WALL
        uxl[-1] = np.where(xk[-1] == FaceKind.OUTLET, _LINK_OUT, _LINK_WALL)
        uyl = np.full((nx + 1, ny + 1), _LINK_COUPLED, dtype=np.int8)
        uyl[:, 0] = _LINK_WALL
        uyl[:, -1] = _LINK_WALL
        inactive = xk == FaceKind.INACTIVE
        uyl[:, 1:-1][inactive[:, :-1] | inactive[:, 1:]] = _LINK_WALL
        self.u_links = (uxl, uyl)

        # v sub-grid links
        vxl = np.full((nx + 1, ny + 1), _LINK_COUPLED, dtype=np.int8)
        vxl[0] = _LINK_WALL
        vxl[-1] = _LINK_OUT
        inactive = yk == FaceKind.INACTIVE
        vxl[1:-1][inactive[:-1] | inactive[1:]] = _LINK_WALL
        vyl = np.full((nx, ny + 2), _LINK_COUPLED, dtype=np.int8)
        vyl[:, 0] = _LINK_WALL
        vyl[:, -1] = _LINK_WALL
        self.v_links = (vxl, vyl)

        self._static = self._pressure_blocks()

    def _pressure_blocks(self):
        g = self.grid
        nx, ny = g.nx, g.ny
        pidx = np.arange(self.np_).reshape(nx, ny)
        uidx = np.arange(self.nu).reshape(nx + 1, ny)
        vidx = np.arange(self.nv).reshape(nx, ny + 1)

        # pressure gradient in u rows: dy * (p[i] - p[i-1]); outlet ghost p = 0
        rows, cols, vals = [], [], []
        ii, jj = np.nonzero(self.u_active)
        east = ii < nx
        rows += [uidx[ii[east], jj[east]]]
        cols += [pidx[ii[east], jj[east]]]
        vals += [np.full(east.sum(), g.dy)]
        west = ii > 0
        rows += [uidx[ii[west], jj[west]]]
        cols += [pidx[ii[west] - 1, jj[west]]]
        vals += [np.full(west.sum(), -g.dy)]
        gu = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                           shape=(self.nu, self.np_))
        ii, jj = np.nonzero(self.v_active)
        gv = sp.csr_matrix(
            (np.concatenate([np.full(ii.size, g.dx), np.full(ii.size, -g.dx)]),
             (np.concatenate([vidx[ii, jj], vidx[ii, jj]]),
              np.concatenate([pidx[ii, jj], pidx[ii, jj - 1]]))),
            shape=(self.nv, self.np_))

        # continuity in fluid cells; identity for solid cells
        ii, jj = np.nonzero(g.fluid)
        prow = pidx[ii, jj]
        du = sp.csr_matrix(
            (np.concatenate([np.full(ii.size, g.dy), np.full(ii.size, -g.dy)]),
             (np.concatenate([prow, prow]), np.concatenate([uidx[ii + 1, jj], uidx[ii, jj]]))),
            shape=(self.np_, self.nu))
        dv = sp.csr_matrix(
            (np.concatenate([np.full(ii.size, g.dx), np.full(ii.size, -g.dx)]),
             (np.concatenate([prow, prow]), np.concatenate([vidx[ii, jj + 1], vidx[ii, jj]]))),
            shape=(self.np_, self.nv))
        solid = pidx[~g.fluid]
        ps = sp.csr_matrix((np.ones(solid.size), (solid, solid)), shape=(self.np_, self.np_))
        return gu, gv, du, dv, ps

    def advecting_velocities(self, u, v):
        """Link-normal velocities for the u and v control volumes."""
        # u CVs: x-links at cell centres, y-links at cell corners
        uxv = np.empty((u.shape[0] + 1, u.shape[1]))
        uxv[1:-1] = 0.5 * (u[:-1] + u[1:])
        uxv[0] = u[0]
        uxv[-1] = u[-1]
        vpad = np.concatenate([v[:1], v, v[-1:]], axis=0)
        uyv = 0.5 * (vpad[:-1] + vpad[1:])
        # v CVs: x-links at corners, y-links at cell centres
        upad = np.concatenate([u[:, :1], u, u[:, -1:]], axis=1)
        vxv = 0.5 * (upad[:, :-1] + upad[:, 1:])
        vyv = np.empty((v.shape[0], v.shape[1] + 1))
        vyv[:, 1:-1] = 0.5 * (v[:, :-1] + v[:, 1:])
        vyv[:, 0] = v[:, 0]
        vyv[:, -1] = v[:, -1]
        return (uxv, uyv), (vxv, vyv)

    def momentum(self, u, v, props: FluidProps):
        g = self.grid
        (uxv, uyv), (vxv, vyv) = self.advecting_velocities(u, v)
        cu = kernels.scalar_coefficients(self.u_active, *self.u_links, _BC_TYPE, _BC_VALUE,
                                         uxv, uyv, props.eta, props.rho, g.dx, g.dy)
        cv = kernels.scalar_coefficients(self.v_active, *self.v_links, _BC_TYPE, _BC_VALUE,
                                         vxv, vyv, props.eta, props.rho, g.dx, g.dy)
        return cu, cv

    def system(self, cu, cv, force: BodyForceField, u_fixed, v_fixed, pscale):
        g = self.grid
        au = five_point_matrix(*cu[:5])
        av = five_point_matrix(*cv[:5])
        gu, gv, du, dv, ps = self._static
        k = sp.bmat([[au, None, gu * pscale],
                     [None, av, gv * pscale],
                     [du * pscale, dv * pscale, ps]], format="csc")
        vol = g.cell_area
        bu = np.where(self.u_active, cu[5] + force.fx * vol, u_fixed).ravel()
        bv = np.where(self.v_active, cv[5] + force.fy * vol, v_fixed).ravel()
        rhs = np.concatenate([bu, bv, np.zeros(self.np_)])
        return k, rhs

    def split(self, x, pscale):
        g = self.grid
        u = x[:self.nu].reshape(g.nx + 1, g.ny)
        v = x[self.nu:self.nu + self.nv].reshape(g.nx, g.ny + 1)
        p = x[self.nu + self.nv:].reshape(g.nx, g.ny) * pscale
        return u, v, np.where(g.fluid, p, 0.0)


def _momentum_residual(layout, u, v, p, force, props):
    """Velocity-scaled residual ``max |r_i / aP_i|`` of the momentum rows."""
    cu, cv = layout.momentum(u, v, props)
    g = layout.grid
    vol = g.cell_area
    out = 0.0
    for coeffs, vel, active, f, grad in (
        (cu, u, layout.u_active, force.fx, layout._static[0]),
        (cv, v, layout.v_active, force.fy, layout._static[1]),
    ):
        a = five_point_matrix(*coeffs[:5])
        r = a @ vel.ravel() + grad @ p.ravel() - (coeffs[5] + f * vol).ravel()
        r = np.where(active.ravel(), r / coeffs[0].ravel(), 0.0)
        out = max(out, float(np.abs(r).max()))
    return out


def solve_flow(grid: Grid, force: BodyForceField | None, inlet_mean: float,
               props: FluidProps = FluidProps(), tol: float = 1e-6,
               max_iter: int = 100, relax: float = 0.7,
               initial: FlowField | None = None) -> FlowField:
    """Steady flow driven by the inlet and the body force ``force``.

    Converged when the momentum residual, expressed as a velocity and
    divided by the peak face speed, drops below ``tol``. ``initial`` warm
    starts the advecting velocity. Raises :class:`SolverError` (with the
    residual history) after ``max_iter`` Picard sweeps.
    """
    if inlet_mean < 0:
        raise ValueError("inlet_mean must be non-negative")
    force = force if force is not None else BodyForceField.zeros(grid)
    if force.fx.shape != (grid.nx + 1, grid.ny) or force.fy.shape != (grid.nx, grid.ny + 1):
        raise ValueError("force field does not match the grid")
    layout = _Layout(grid)
    u_fixed = np.zeros((grid.nx + 1, grid.ny))
    u_fixed[0] = inlet_profile(grid, inlet_mean)
    v_fixed = np.zeros((grid.nx, grid.ny + 1))
    pscale = props.eta / min(grid.dx, grid.dy)

    if initial is not None:
        u_adv, v_adv = initial.u.copy(), initial.v.copy()
    else:
        u_adv = np.broadcast_to(u_fixed[0], u_fixed.shape).copy()
        u_adv[~layout.u_active & (grid.xkind != FaceKind.INLET)] = 0.0
        v_adv = v_fixed.copy()

    history = []
    u = v = p = None
    for it in range(1, max_iter + 1):
        cu, cv = layout.momentum(u_adv, v_adv, props)
        k, rhs = layout.system(cu, cv, force, u_fixed, v_fixed, pscale)
        x = factorize(k).solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SolverError("flow solve produced non-finite values", history=history)
        u, v, p = layout.split(x, pscale)
        scale = max(np.abs(u).max(), np.abs(v).max())
        if scale == 0.0:
            history.append(0.0)
            break
        res = _momentum_residual(layout, u, v, p, force, props) / scale
        history.append(res)
        if res <= tol:
            break
        u_adv = relax * u + (1.0 - relax) * u_adv
        v_adv = relax * v + (1.0 - relax) * v_adv
    else:
        raise SolverError(
            f"flow did not converge in {max_iter} iterations (residual {history[-1]:.3e})",
            residual=history[-1], history=history)
    return FlowField(grid, u, v, p, inlet_mean, it, tuple(history))
