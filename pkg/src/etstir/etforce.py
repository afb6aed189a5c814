"""Time-averaged electrothermal body force.

With ``alpha_sigma = (1/sigma) dsigma/dT`` and ``alpha_eps = (1/eps) deps/dT``
the force per unit volume is::

    F = -(eps/2) * [ (alpha_sigma - alpha_eps) (gradT . E) E / (1 + (omega tau)^2)
                     + (|E|^2 / 2) alpha_eps gradT ]

The first term is the Coulomb contribution and dominates for
``omega tau << 1``; the second is the dielectric contribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .electrostatics import EField
from .fv import face_gradients
from .mesh import FaceKind
from .properties import DriveSpec, FluidProps
from .thermal import TemperatureField


@dataclass(frozen=True, eq=False)
class BodyForceField:
    """Face-normal force components: ``fx`` on x-faces, ``fy`` on y-faces (N/m^3)."""

    fx: np.ndarray = field(repr=False)
    fy: np.ndarray = field(repr=False)

    @property
    def max_abs(self) -> float:
        return float(max(np.abs(self.fx).max(), np.abs(self.fy).max()))

    def scaled(self, factor: float) -> "BodyForceField":
        return BodyForceField(self.fx * factor, self.fy * factor)

    @classmethod
    def zeros(cls, grid) -> "BodyForceField":
        return cls(np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))


def charge_relaxation_time(props: FluidProps) -> float:
    """``tau = eps / sigma`` in seconds."""
    if not props.sigma > 0:
        raise ValueError("conductivity must be positive")
    return props.eps / props.sigma


def frequency_factor(props: FluidProps, drive: DriveSpec) -> float:
    """``1 / (1 + (omega tau)^2)``, the Coulomb-term roll-off."""
    wt = drive.omega * charge_relaxation_time(props)
    return 1.0 / (1.0 + wt * wt)


def force_coefficients(props: FluidProps, drive: DriveSpec) -> tuple[float, float]:
    """Prefactors of ``(gradT.E) E`` and ``|E|^2 gradT`` in the force."""
    half_eps = 0.5 * props.eps
    coulomb = -half_eps * props.alpha_diff * frequency_factor(props, drive)
    dielectric = -half_eps * 0.5 * props.alpha_eps
    return coulomb, dielectric


def point_force(e_vec, grad_t, props: FluidProps, drive: DriveSpec) -> np.ndarray:
    """Force for explicit vectors ``E`` and ``gradT`` (any trailing dimension)."""
    e_vec = np.asarray(e_vec, dtype=float)
    grad_t = np.asarray(grad_t, dtype=float)
    coulomb, dielectric = force_coefficients(props, drive)
    dot = np.sum(e_vec * grad_t, axis=-1, keepdims=True)
    e2 = np.sum(e_vec * e_vec, axis=-1, keepdims=True)
    return coulomb * dot * e_vec + dielectric * e2 * grad_t


def compute_et_force(e: EField, t: TemperatureField, props: FluidProps,
                     drive: DriveSpec) -> BodyForceField:
    """Electrothermal force on every fluid-interior face of the grid.

    Face-normal components of ``E`` and ``gradT`` are native; tangential
    components are interpolated from the neighbouring cell averages.
    """
    grid = e.grid
    if t.grid.shape != grid.shape:
        raise ValueError(f"field grids differ: {grid.shape} vs {t.grid.shape}")
    gtx, gty = face_gradients(t.t, t.grid, t.dirichlet_values())
    coulomb, dielectric = force_coefficients(props, drive)
    # only faces that carry a momentum equation need the force
    xactive = (grid.xkind == FaceKind.INTERIOR) | (grid.xkind == FaceKind.OUTLET)
    yactive = grid.ykind == FaceKind.INTERIOR
    fx, fy = kernels.et_force(e.ex, e.ey, gtx, gty, xactive, yactive,
                              coulomb, dielectric)
    return BodyForceField(fx, fy)
