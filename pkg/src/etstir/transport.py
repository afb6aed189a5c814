"""Analyte transport and Langmuir surface binding.

Bulk concentration ``a`` (mol/m^3) is advected and diffused with implicit
Euler steps on the frozen flow. Each reactive face removes analyte at the
rate::

    J = k_a * a_s * (b0 - ab) - k_d * ab          (mol / m^2 / s)

where ``ab`` is the bound complex on that face and ``a_s`` the concentration
at the face. ``a_s`` is reconstructed from the adjacent cell value by
matching ``J`` to the diffusive flux across the half cell between the cell
centre and the face, which keeps the scheme linear in the cell value.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import MonotonicityError, SolverError
from .fv import bc_table
from .linalg import factorize, five_point_matrix
from .mesh import FaceKind, Grid
from .properties import FluidProps, ReactionParams


@dataclass(frozen=True, eq=False)
class ConcentrationField:
    grid: Grid = field(repr=False)
    a: np.ndarray = field(repr=False)

    @classmethod
    def uniform(cls, grid: Grid, value: float) -> "ConcentrationField":
        return cls(grid, np.where(grid.fluid, value, 0.0))

    def total(self) -> float:
        """Analyte per unit depth, mol/m."""
        return float(self.a[self.grid.fluid].sum()) * self.grid.cell_area

    def extrema(self) -> tuple[float, float]:
        vals = self.a[self.grid.fluid]
        return float(vals.min()), float(vals.max())


@dataclass(frozen=True, eq=False)
class SurfaceState:
    """Bound complex per reactive face (mol/m^2) at simulated time ``time``."""

    ab: np.ndarray = field(repr=False)
    length: np.ndarray = field(repr=False)
    time: float = 0.0
    clamped: int = 0

    @classmethod
    def empty(cls, grid: Grid) -> "SurfaceState":
        n = len(grid.reactive)
        return cls(np.zeros(n), grid.reactive.length.copy())


def mean_coverage(surface: SurfaceState) -> float:
    """Length-weighted mean of ``ab`` over the reactive faces."""
    if surface.length.size == 0:
        raise ValueError("no reactive faces")
    return float(np.sum(surface.ab * surface.length) / np.sum(surface.length))


def wellmixed_oracle(params: ReactionParams, t):
    """Coverage with the face concentration pinned at ``a_inlet``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = params.ab_eq * -np.expm1(-params.rate * t)
    return float(out) if out.ndim == 0 else out


def robin_coefficients(ab, gap, params: ReactionParams, D: float):
    """Linearised face flux ``J = c1 * a_cell - c0`` for frozen ``ab``.

    ``gap`` is the cell-centre-to-face distance. Returns ``(c1, c0, g, kappa)``
    with ``g = D / gap`` and ``kappa = k_a (b0 - ab)``.
    """
    g = D / gap
    kappa = params.k_a * (params.b0 - ab)
    denom = g + kappa
    c1 = g * kappa / denom
    c0 = g * params.k_d * ab / denom
    return c1, c0, g, kappa


def face_concentration(a_cell, ab, gap, params: ReactionParams, D: float):
    """Concentration at the reactive face consistent with the face flux."""
    g = D / gap
    kappa = params.k_a * (params.b0 - ab)
    return (g * a_cell + params.k_d * ab) / (g + kappa)


def advance_surface(surface: SurfaceState, a_face, params: ReactionParams,
                    dt: float) -> SurfaceState:
    """Implicit Euler step of ``d ab/dt = k_a a (b0 - ab) - k_d ab`` with
    ``a`` frozen over the step (closed form). Values outside ``[0, b0]`` are
    clamped and counted."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    a_face = np.asarray(a_face, dtype=float)
    ka_a = params.k_a * a_face
    ab = (surface.ab + dt * ka_a * params.b0) / (1.0 + dt * (ka_a + params.k_d))
    bad = (ab < 0) | (ab > params.b0)
    if bad.any():
        ab = np.clip(ab, 0.0, params.b0)
    return replace(surface, ab=ab, time=surface.time + dt,
                   clamped=surface.clamped + int(bad.sum()))


class ConcentrationStepper:
    """Implicit advection-diffusion-reaction stepping on a frozen flow.

    The advection-diffusion and storage part of the matrix is factorised
    once per ``dt``; the reactive faces only change the diagonal of the
    cells they border, which is folded in with a Woodbury correction.
    """

    def __init__(self, grid: Grid, flow, params: ReactionParams, props: FluidProps,
                 dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.flow = flow
        self.params = params
        self.props = props
        rf = grid.reactive
        self._cells = rf.cell_i * grid.ny + rf.cell_j
        self._ucells, self._inverse = np.unique(self._cells, return_inverse=True)
        self.last_balance = None
        self._build(dt)

    def _build(self, dt):
        g = self.grid
        self.dt = dt
        if self.flow is None:
            uf, vf = np.zeros((g.nx + 1, g.ny)), np.zeros((g.nx, g.ny + 1))
        else:
            uf, vf = self.flow.u, self.flow.v
        self._uf = uf
        bc_type, bc_value = bc_table({FaceKind.INLET: self.params.a_inlet},
                                     outflow=[FaceKind.OUTLET])
        ap, aw, ae, as_, an, b = kernels.scalar_coefficients(
            g.fluid, g.xkind, g.ykind, bc_type, bc_value, uf, vf,
            self.props.D, 1.0, g.dx, g.dy)
        storage = g.cell_area / dt
        ap = np.where(g.fluid, ap + storage, 1.0)
        self._b_bc = b.ravel()
        self._storage = storage
        self._lu = factorize(five_point_matrix(ap, aw, ae, as_, an))
        m = self._ucells.size
        if m:
            e = np.zeros((g.nx * g.ny, m))
            e[self._ucells, np.arange(m)] = 1.0
            self._z = self._lu.solve(e)
            self._zu = self._z[self._ucells]  # U^T M0^-1 U
        self._inlet = g.xkind[0] == FaceKind.INLET
        self._outlet = g.xkind[-1] == FaceKind.OUTLET

    def _solve(self, rhs, diag_add):
        y = self._lu.solve(rhs)
        if self._ucells.size == 0:
            return y
        c = np.bincount(self._inverse, weights=diag_add, minlength=self._ucells.size)
        s = np.eye(c.size) + c[:, None] * self._zu
        corr = np.linalg.solve(s, c * y[self._ucells])
        return y - self._z @ corr

    def concentration_step(self, a: ConcentrationField, surface: SurfaceState):
        """One implicit step of the bulk with ``ab`` frozen.

        Returns the new field and the per-face flux at the new time level.
        """
        g = self.grid
        rf = g.reactive
        c1, c0, _, _ = robin_coefficients(surface.ab, rf.gap, self.params, self.props.D)
        rhs = self._b_bc + np.where(g.fluid, a.a, 0.0).ravel() * self._storage
        np.add.at(rhs, self._cells, c0 * rf.length)
        x = self._solve(rhs, c1 * rf.length)
        if not np.all(np.isfinite(x)):
            raise SolverError("concentration solve produced non-finite values")
        new = np.where(g.fluid, x.reshape(g.shape), 0.0)
        flux = c1 * new[rf.cell_i, rf.cell_j] - c0
        floor = -1e-9 * max(self.params.a_inlet, 1e-300)
        if new.min() < floor:
            raise MonotonicityError(f"negative concentration {new.min():.3e} mol/m^3")
        out = ConcentrationField(g, new)
        self.last_balance = self.species_balance(a, out, flux)
        return out, flux

    def species_balance(self, old: ConcentrationField, new: ConcentrationField, flux):
        """Per-step analyte budget (mol/m/s); ``residual`` is relative."""
        g = self.grid
        p = self.params
        D = self.props.D
        a = new.a
        uin = self._uf[0][self._inlet]
        inflow = g.dy * float(np.sum(uin * p.a_inlet
                                     + D * (p.a_inlet - a[0][self._inlet]) / (0.5 * g.dx)))
        outflow = g.dy * float(np.sum(self._uf[-1][self._outlet] * a[-1][self._outlet]))
        surface = float(np.sum(flux * g.reactive.length))
        storage = (new.total() - old.total()) / self.dt
        terms = np.abs([inflow, outflow, surface, storage])
        # floor at round-off of the stored inventory so a quiescent field passes
        scale = max(terms.max(), 1e-12 * abs(old.total()) / self.dt)
        imbalance = inflow - outflow - surface - storage
        return {"inflow": inflow, "outflow": outflow, "surface": surface,
                "storage": storage,
                "residual": imbalance / scale if scale > 0 else 0.0}

    def face_values(self, a: ConcentrationField, surface: SurfaceState):
        rf = self.grid.reactive
        return face_concentration(a.a[rf.cell_i, rf.cell_j], surface.ab, rf.gap,
                                  self.params, self.props.D)

    def step(self, a: ConcentrationField, surface: SurfaceState, balance_tol=1e-3,
             min_dt=1e-6):
        """Advance bulk then surface by ``self.dt`` with one optional re-sweep.

        If the species balance misses ``balance_tol`` the step size is halved
        (permanently) and the step retried.
        """
        while True:
            a_new, flux = self.concentration_step(a, surface)
            if abs(self.last_balance["residual"]) <= balance_tol:
                break
            if self.dt / 2 < min_dt:
                raise SolverError("species balance fails even at the minimum step",
                                  residual=self.last_balance["residual"])
            self._build(self.dt / 2)
        s_new = advance_surface(surface, self.face_values(a_new, surface), self.params, self.dt)
        c1, c0, _, _ = robin_coefficients(s_new.ab, self.grid.reactive.gap,
                                          self.params, self.props.D)
        rf = self.grid.reactive
        flux_after = c1 * a_new.a[rf.cell_i, rf.cell_j] - c0
        scale = np.abs(flux).max() if flux.size else 0.0
        if scale > 0 and np.abs(flux_after - flux).max() > 0.01 * scale:
            a_new, flux = self.concentration_step(a, s_new)
            s_new = advance_surface(surface, self.face_values(a_new, s_new),
                                    self.params, self.dt)
        return a_new, s_new, flux


def advance_concentration(a: ConcentrationField, flow, surface: SurfaceState,
                          params: ReactionParams, props: FluidProps, dt: float):
    """Single implicit bulk step; builds a throw-away stepper.

    Use :class:`ConcentrationStepper` directly when taking many steps.
    """
    stepper = ConcentrationStepper(a.grid, flow, params, props, dt)
    return stepper.concentration_step(a, surface)
