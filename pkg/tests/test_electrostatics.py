from dataclasses import replace

import numpy as np
import pytest

from etstir.electrostatics import electric_field, solve_potential, PotentialField
from etstir.mesh import FaceKind, Geometry, build_grid

UM = 1e-6


def parallel_plate_grid(nx=32, ny=16):
    """Whole bottom wall at electrode A, whole top wall at electrode B."""
    g = build_grid(Geometry(cantilever_mode="none", channel_length=200 * UM,
                            electrode_width=40 * UM, electrode_gap=100 * UM), nx, ny)
    ykind = g.ykind.copy()
    ykind[:, 0] = FaceKind.ELECTRODE_A
    ykind[:, -1] = FaceKind.ELECTRODE_B
    ykind.setflags(write=False)
    return replace(g, ykind=ykind)


def test_zero_voltage_gives_zero_potential(default_grid):
    phi = solve_potential(default_grid, 0.0)
    assert not phi.phi.any()
    e = electric_field(phi)
    assert not e.ex.any() and not e.ey.any() and not e.e2.any()


def test_parallel_plate_is_linear():
    g = parallel_plate_grid()
    v = 10.0
    phi = solve_potential(g, v)
    y = g.yc
    expected = 0.5 * v - v * y / g.geometry.channel_height
    np.testing.assert_allclose(phi.phi, np.broadcast_to(expected, g.shape), atol=1e-7)
    e = electric_field(phi)
    np.testing.assert_allclose(e.ey, v / g.geometry.channel_height, rtol=1e-7)
    np.testing.assert_allclose(e.ex, 0.0, atol=1e-6 * 1e5)
    # 10 V over 100 um
    np.testing.assert_allclose(e.magnitude, 1e5, rtol=1e-7)


def test_parallel_plate_exact_at_every_resolution():
    # the discrete solution is exact for a linear profile, so refinement
    # can only expose solver error, which stays at the tolerance level
    for n in (8, 16, 32, 64):
        g = parallel_plate_grid(2 * n, n)
        e = electric_field(solve_potential(g, 10.0, tol=1e-12))
        assert np.abs(e.magnitude - 1e5).max() / 1e5 < 1e-8


def test_linear_potential_gives_exact_field(empty_grid):
    g = empty_grid
    a = 3.0e4
    phi = PotentialField(g, -a * np.broadcast_to(g.xc[:, None], g.shape), 0.0, 0.0)
    e = electric_field(phi)
    np.testing.assert_allclose(e.ex[1:-1], a, rtol=1e-12)
    np.testing.assert_allclose(e.ey[:, 1:-1], 0.0, atol=1e-9)


def test_maximum_principle(default_grid):
    phi = solve_potential(default_grid, 25.0)
    vals = phi.phi[default_grid.fluid]
    assert vals.max() <= 12.5 + 1e-9
    assert vals.min() >= -12.5 - 1e-9


def test_antisymmetry_about_gap_centre():
    # cantilever absent so the reflection maps the domain onto itself
    g = build_grid(Geometry(cantilever_mode="none"), 256, 96)
    phi = solve_potential(g, 25.0).phi
    # cx = 250 um lies on the face between columns 127 and 128
    np.testing.assert_allclose(phi, -phi[::-1], atol=1e-5)


def test_antisymmetry_with_cantilever(default_grid):
    phi = solve_potential(default_grid, 25.0).phi
    np.testing.assert_allclose(phi, -phi[::-1], atol=1e-5)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_linearity(coarse_grid, alpha):
    p1 = solve_potential(coarse_grid, 10.0).phi
    p2 = solve_potential(coarse_grid, 10.0 * alpha).phi
    np.testing.assert_allclose(p2, alpha * p1, atol=1e-6 * 10 * alpha)


def test_field_is_minus_gradient(coarse_grid):
    g = coarse_grid
    phi = solve_potential(g, 20.0)
    e = electric_field(phi)
    p = phi.phi
    both = g.fluid[:-1] & g.fluid[1:]
    np.testing.assert_allclose(e.ex[1:-1][both], -((p[1:] - p[:-1]) / g.dx)[both])


def test_tolerance_validated(coarse_grid):
    with pytest.raises(ValueError):
        solve_potential(coarse_grid, 1.0, tol=1e-3)
    with pytest.raises(ValueError):
        solve_potential(coarse_grid, 1.0, tol=0.0)


def test_electrode_boundary_values(default_grid):
    phi = solve_potential(default_grid, 25.0)
    assert phi.electrode_values == {FaceKind.ELECTRODE_A: 12.5, FaceKind.ELECTRODE_B: -12.5}
    # cells touching electrode A sit close to +12.5 V
    a_cols = default_grid.ykind[:, 0] == FaceKind.ELECTRODE_A
    assert phi.phi[a_cols, 0].mean() > 10.0
