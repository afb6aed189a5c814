"""Channel geometry and its uniform structured grid.

Coordinates: ``x`` runs along the channel from the inlet (x = 0) to the
outlet, ``y`` from the bottom wall (y = 0, where the electrodes sit) to the
top wall. Cell arrays have shape ``(nx, ny)``; x-face arrays ``(nx+1, ny)``;
y-face arrays ``(nx, ny+1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from enum import IntEnum
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import GeometryError, ResolutionError

CANTILEVER_MODES = ("suspended", "top_wall_segment", "none")
REACTIVE_SIDES = ("bottom", "top", "both")


class FaceKind(IntEnum):
    INTERIOR = 0
    INLET = 1
    OUTLET = 2
    WALL = 3
    ELECTRODE_A = 4
    ELECTRODE_B = 5
    REACTIVE = 6
    INACTIVE = 7  # between two solid cells


N_FACE_KINDS = len(FaceKind)


@dataclass(frozen=True)
class Geometry:
    """Channel, electrode pair and cantilever layout (SI units).

    ``electrode_pair_center_x`` defaults to mid-channel. ``cantilever_center``
    defaults to the gap centre, with the cantilever's lower face
    ``cantilever_elevation`` above the bottom wall.
    """

    channel_length: float = 500e-6
    channel_height: float = 100e-6
    electrode_width: float = 60e-6
    electrode_gap: float = 15e-6
    electrode_pair_center_x: float | None = None
    cantilever_length: float = 40e-6
    cantilever_thickness: float = 4e-6
    cantilever_center: tuple[float, float] | None = None
    cantilever_elevation: float = 20e-6
    cantilever_mode: str = "suspended"
    reactive_faces: str = "bottom"

    def __post_init__(self):
        if self.cantilever_center is not None:
            object.__setattr__(self, "cantilever_center",
                               tuple(float(c) for c in self.cantilever_center))

    @property
    def gap_center(self) -> float:
        if self.electrode_pair_center_x is None:
            return 0.5 * self.channel_length
        return self.electrode_pair_center_x

    @property
    def cantilever_xy(self) -> tuple[float, float]:
        if self.cantilever_center is not None:
            return self.cantilever_center
        return (self.gap_center,
                self.cantilever_elevation + 0.5 * self.cantilever_thickness)

    def electrode_spans(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """x-intervals of electrode A (upstream) and electrode B."""
        c, g, w = self.gap_center, self.electrode_gap, self.electrode_width
        return (c - 0.5 * g - w, c - 0.5 * g), (c + 0.5 * g, c + 0.5 * g + w)

    def cantilever_box(self) -> tuple[float, float, float, float]:
        cx, cy = self.cantilever_xy
        hl, ht = 0.5 * self.cantilever_length, 0.5 * self.cantilever_thickness
        return cx - hl, cx + hl, cy - ht, cy + ht

    def validate(self) -> None:
        if self.channel_length <= 0 or self.channel_height <= 0:
            raise GeometryError("channel dimensions must be positive")
        if self.electrode_width <= 0 or self.electrode_gap <= 0:
            raise GeometryError("electrode_width and electrode_gap must be positive")
        (a0, _), (_, b1) = self.electrode_spans()
        if a0 < 0 or b1 > self.channel_length:
            raise GeometryError(
                f"electrodes span [{a0:.3e}, {b1:.3e}] m, outside the channel")
        if self.cantilever_mode not in CANTILEVER_MODES:
            raise GeometryError(f"unknown cantilever_mode {self.cantilever_mode!r}")
        if self.reactive_faces not in REACTIVE_SIDES:
            raise GeometryError(f"unknown reactive_faces {self.reactive_faces!r}")
        if self.cantilever_mode == "none":
            return
        if self.cantilever_length <= 0 or self.cantilever_thickness <= 0:
            raise GeometryError("cantilever dimensions must be positive")
        x0, x1, y0, y1 = self.cantilever_box()
        if x0 <= 0 or x1 >= self.channel_length:
            raise GeometryError("cantilever extends past the channel ends")
        if self.cantilever_mode == "suspended" and (y0 <= 0 or y1 >= self.channel_height):
            raise GeometryError("suspended cantilever intersects a channel wall")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cantilever_center"] = list(self.cantilever_xy)
        d["electrode_pair_center_x"] = self.gap_center
        return d


class ReactiveFaces(NamedTuple):
    """Reactive faces ordered by x, then y.

    ``cell_i``/``cell_j`` index the fluid cell the face borders, ``normal`` is
    the unit normal pointing out of the fluid (into the surface), ``length``
    the face area per unit depth, ``gap`` the distance from the fluid cell
    centre to the face.
    """

    cell_i: np.ndarray
    cell_j: np.ndarray
    normal: np.ndarray  # (n, 2) ints
    length: np.ndarray
    gap: np.ndarray

    def __len__(self):
        return len(self.cell_i)

    @property
    def total_length(self) -> float:
        return float(self.length.sum())


@dataclass(frozen=True, eq=False)
class Grid:
    geometry: Geometry
    nx: int
    ny: int
    dx: float
    dy: float
    fluid: np.ndarray = field(repr=False)
    xkind: np.ndarray = field(repr=False)
    ykind: np.ndarray = field(repr=False)
    reactive: ReactiveFaces = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nx, self.ny

    @property
    def cell_kind(self) -> np.ndarray:
        """0 for fluid cells, 1 for solid obstacle cells."""
        return np.where(self.fluid, 0, 1).astype(np.int8)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def xc(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def yc(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    @property
    def n_fluid(self) -> int:
        return int(self.fluid.sum())

    def boundary_faces(self):
        """All non-interior, non-inactive faces as ``(axis, i, j, FaceKind)``."""
        out = []
        for axis, kinds in ((0, self.xkind), (1, self.ykind)):
            mask = (kinds != FaceKind.INTERIOR) & (kinds != FaceKind.INACTIVE)
            for i, j in zip(*np.nonzero(mask)):
                out.append((axis, int(i), int(j), FaceKind(int(kinds[i, j]))))
        return out

    def face_length(self, kind: FaceKind) -> float:
        """Total length of faces of one kind (per unit depth)."""
        return float((self.xkind == kind).sum() * self.dy
                     + (self.ykind == kind).sum() * self.dx)


def build_grid(geometry: Geometry, nx: int, ny: int) -> Grid:
    """Rasterise ``geometry`` onto an ``nx`` x ``ny`` cell grid.

    The cantilever becomes a stair-step block of solid cells (those whose
    centres fall inside it). Every face gets exactly one :class:`FaceKind`.

    Raises
    ------
    GeometryError
        Invalid layout, or a cantilever that touches a wall or disconnects
        the fluid region.
    ResolutionError
        The electrode gap or the cantilever thickness spans fewer than two
        cells.
    """
    geometry.validate()
    nx, ny = int(nx), int(ny)
    if nx < 2 or ny < 2:
        raise ResolutionError("grid needs at least 2 x 2 cells")
    dx = geometry.channel_length / nx
    dy = geometry.channel_height / ny
    if geometry.electrode_gap < 2 * dx * (1 - 1e-9):
        raise ResolutionError(
            f"electrode gap {geometry.electrode_gap:.3e} m spans fewer than 2 cells (dx={dx:.3e})")

    xc = (np.arange(nx) + 0.5) * dx
    yc = (np.arange(ny) + 0.5) * dy
    fluid = np.ones((nx, ny), dtype=bool)
    mode = geometry.cantilever_mode
    if mode != "none":
        if geometry.cantilever_length < 2 * dx * (1 - 1e-9):
            raise ResolutionError("cantilever length spans fewer than 2 cells")
        x0, x1, y0, y1 = geometry.cantilever_box()
    if mode == "suspended":
        if geometry.cantilever_thickness < 2 * dy * (1 - 1e-9):
            raise ResolutionError(
                f"cantilever thickness {geometry.cantilever_thickness:.3e} m spans "
                f"fewer than 2 cells (dy={dy:.3e})")
        inside = ((xc[:, None] > x0) & (xc[:, None] < x1)
                  & (yc[None, :] > y0) & (yc[None, :] < y1))
        fluid[inside] = False
        cols = np.nonzero(inside.any(axis=1))[0]
        rows = np.nonzero(inside.any(axis=0))[0]
        if cols.size == 0:
            raise ResolutionError("cantilever does not cover any cell centre")
        if rows[0] < 1 or rows[-1] > ny - 2:
            raise GeometryError("cantilever leaves no fluid cell between it and a wall")

    xkind = np.full((nx + 1, ny), FaceKind.INTERIOR, dtype=np.int8)
    left, right = fluid[:-1], fluid[1:]
    xkind[1:-1][left ^ right] = FaceKind.WALL
    xkind[1:-1][~left & ~right] = FaceKind.INACTIVE
    xkind[0] = np.where(fluid[0], FaceKind.INLET, FaceKind.INACTIVE)
    xkind[-1] = np.where(fluid[-1], FaceKind.OUTLET, FaceKind.INACTIVE)

    ykind = np.full((nx, ny + 1), FaceKind.INTERIOR, dtype=np.int8)
    below, above = fluid[:, :-1], fluid[:, 1:]
    ykind[:, 1:-1][below ^ above] = FaceKind.WALL
    ykind[:, 1:-1][~below & ~above] = FaceKind.INACTIVE
    (a0, a1), (b0, b1) = geometry.electrode_spans()
    bottom = np.full(nx, FaceKind.WALL, dtype=np.int8)
    bottom[(xc > a0) & (xc < a1)] = FaceKind.ELECTRODE_A
    bottom[(xc > b0) & (xc < b1)] = FaceKind.ELECTRODE_B
    if not (bottom == FaceKind.ELECTRODE_A).any() or not (bottom == FaceKind.ELECTRODE_B).any():
        raise ResolutionError("an electrode covers no bottom-wall face")
    ykind[:, 0] = np.where(fluid[:, 0], bottom, FaceKind.INACTIVE)
    ykind[:, -1] = np.where(fluid[:, -1], FaceKind.WALL, FaceKind.INACTIVE)

    # reactive faces: (fluid i, fluid j, normal_x, normal_y, face j index)
    picks = []
    if mode == "suspended":
        side = geometry.reactive_faces
        if side in ("bottom", "both"):
            ii, jj = np.nonzero(below & ~above)  # fluid below a solid cell
            picks += [(i, j, 0, 1, j + 1) for i, j in zip(ii, jj)]
        if side in ("top", "both"):
            ii, jj = np.nonzero(~below & above)
            picks += [(i, j + 1, 0, -1, j + 1) for i, j in zip(ii, jj)]
    elif mode == "top_wall_segment":
        ii = np.nonzero((xc > x0) & (xc < x1))[0]
        picks += [(i, ny - 1, 0, 1, ny) for i in ii]
    for i, _, _, _, jf in picks:
        ykind[i, jf] = FaceKind.REACTIVE
    picks.sort(key=lambda p: (p[0], p[1]))
    n = len(picks)
    reactive = ReactiveFaces(
        cell_i=np.array([p[0] for p in picks], dtype=np.int64),
        cell_j=np.array([p[1] for p in picks], dtype=np.int64),
        normal=np.array([[p[2], p[3]] for p in picks], dtype=np.int64).reshape(n, 2),
        length=np.full(n, dx),
        gap=np.full(n, 0.5 * dy),
    )

    labels, ncomp = ndimage.label(fluid)
    if ncomp != 1:
        raise GeometryError(f"fluid region splits into {ncomp} disconnected parts")

    for arr in (fluid, xkind, ykind):
        arr.setflags(write=False)
    return Grid(geometry=geometry, nx=nx, ny=ny, dx=dx, dy=dy, fluid=fluid,
                xkind=xkind, ykind=ykind, reactive=reactive)
