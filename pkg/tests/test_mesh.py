import numpy as np
import pytest

from etstir.errors import GeometryError, ResolutionError
from etstir.mesh import FaceKind, Geometry, build_grid
from etstir.io import read_grid, write_grid

UM = 1e-6


def test_empty_channel_tiny_grid():
    # a gap wide enough to be resolved by 4 columns
    geo = Geometry(cantilever_mode="none", electrode_width=100 * UM, electrode_gap=250 * UM)
    g = build_grid(geo, 4, 4)
    assert g.n_fluid == 16
    assert len(g.reactive) == 0


def test_electrode_a_span(default_grid):
    g = default_grid
    cx = g.geometry.gap_center
    faces = np.nonzero(g.ykind[:, 0] == FaceKind.ELECTRODE_A)[0]
    lo, hi = faces[0] * g.dx, (faces[-1] + 1) * g.dx
    assert abs(lo - (cx - 67.5 * UM)) <= g.dx
    assert abs(hi - (cx - 7.5 * UM)) <= g.dx


@pytest.mark.parametrize("kind", [FaceKind.ELECTRODE_A, FaceKind.ELECTRODE_B])
def test_electrode_length(default_grid, kind):
    g = default_grid
    assert abs(g.face_length(kind) - 60 * UM) <= g.dx
    # electrodes only on the bottom wall
    assert not (g.xkind == kind).any()
    assert not (g.ykind[:, 1:] == kind).any()


def test_solid_cell_count(default_grid):
    g = default_grid
    expected = round(40 * UM / g.dx) * round(4 * UM / g.dy)
    n_solid = int((~g.fluid).sum())
    assert abs(n_solid - expected) <= round(4 * UM / g.dy) + round(40 * UM / g.dx)


def test_area_partition(default_grid):
    g = default_grid
    total = g.fluid.size * g.cell_area
    assert total == pytest.approx(g.geometry.channel_length * g.geometry.channel_height,
                                  rel=1e-12)


@pytest.mark.parametrize("side,factor", [("bottom", 1), ("top", 1), ("both", 2)])
def test_reactive_length(side, factor):
    g = build_grid(Geometry(reactive_faces=side), 256, 96)
    assert abs(g.reactive.total_length - factor * 40 * UM) <= factor * g.dx


def test_reactive_faces_border_one_fluid_cell(default_grid):
    g = default_grid
    rf = g.reactive
    assert g.fluid[rf.cell_i, rf.cell_j].all()
    for i, j, n in zip(rf.cell_i, rf.cell_j, rf.normal):
        # the neighbour across the face is solid
        assert not g.fluid[i, j + n[1]]


def test_boundary_classified_once(default_grid):
    g = default_grid
    assert set(np.unique(g.xkind[0])) <= {FaceKind.INLET}
    assert set(np.unique(g.xkind[-1])) <= {FaceKind.OUTLET}
    assert set(np.unique(g.ykind[:, -1])) == {FaceKind.WALL}
    assert set(np.unique(g.ykind[:, 0])) == {FaceKind.WALL, FaceKind.ELECTRODE_A,
                                             FaceKind.ELECTRODE_B}
    # every face touching a solid cell is a wall, reactive or inactive
    solid = ~g.fluid
    touch_y = np.zeros_like(g.ykind, dtype=bool)
    touch_y[:, 1:] |= solid
    touch_y[:, :-1] |= solid
    kinds = set(np.unique(g.ykind[touch_y]))
    assert kinds <= {FaceKind.WALL, FaceKind.REACTIVE, FaceKind.INACTIVE}


def test_refinement_covers_electrodes(default_grid):
    fine = build_grid(Geometry(), 512, 192)
    for kind in (FaceKind.ELECTRODE_A, FaceKind.ELECTRODE_B):
        coarse = np.nonzero(default_grid.ykind[:, 0] == kind)[0]
        fine_set = set(np.nonzero(fine.ykind[:, 0] == kind)[0])
        coarse_set = set(coarse)
        for i in coarse:
            assert {2 * i, 2 * i + 1} & fine_set
        for k in fine_set:
            # classification is by face centre, so edges may shift by one fine face
            assert {k // 2 - 1, k // 2, k // 2 + 1} & coarse_set


def test_grid_is_immutable(default_grid):
    with pytest.raises(ValueError):
        default_grid.fluid[0, 0] = False


def test_thin_gap_rejected():
    with pytest.raises(ResolutionError):
        build_grid(Geometry(), 64, 96)


def test_thin_cantilever_rejected():
    with pytest.raises(ResolutionError):
        build_grid(Geometry(), 256, 32)


def test_cantilever_touching_wall_rejected():
    geo = Geometry(cantilever_elevation=0.0)
    with pytest.raises(GeometryError):
        build_grid(geo, 256, 96)


def test_cantilever_outside_domain_rejected():
    with pytest.raises(GeometryError):
        build_grid(Geometry(cantilever_center=(250 * UM, 99 * UM)), 256, 96)


def test_electrodes_must_fit():
    with pytest.raises(GeometryError):
        build_grid(Geometry(electrode_width=300 * UM), 256, 96)


def test_top_wall_segment_mode():
    g = build_grid(Geometry(cantilever_mode="top_wall_segment"), 256, 96)
    assert g.fluid.all()
    assert (g.reactive.cell_j == 95).all()
    assert abs(g.reactive.total_length - 40 * UM) <= g.dx


def test_grid_dump_roundtrip(tmp_path, coarse_grid):
    p = write_grid(coarse_grid, tmp_path / "grid.txt")
    nx, ny, dx, dy, codes = read_grid(p)
    assert (nx, ny) == coarse_grid.shape
    assert dx == coarse_grid.dx and dy == coarse_grid.dy
    np.testing.assert_array_equal(codes, coarse_grid.cell_kind)
    assert p.read_text().split("\n")[0].split()[:2] == ["128", "64"]
