from dataclasses import replace

import numpy as np
import pytest

from etstir.driver import CaseConfig, couple_steady_fields
from etstir.errors import SolverError
from etstir.flow import inlet_profile, solve_flow
from etstir.mesh import FaceKind, Geometry, build_grid
from etstir.properties import DriveSpec, FluidProps

PROPS = FluidProps()


@pytest.fixture(scope="module")
def coupled_15v():
    cfg = CaseConfig(nx=128, ny=64, drive=DriveSpec(v_rms=15.0))
    grid = build_grid(cfg.geometry, cfg.nx, cfg.ny)
    return grid, couple_steady_fields(grid, cfg)


def test_no_driving_no_flow(coarse_grid):
    f = solve_flow(coarse_grid, None, 0.0, PROPS)
    assert not f.u.any() and not f.v.any()
    assert np.ptp(f.p[coarse_grid.fluid]) == 0.0


def test_poiseuille_empty_channel():
    g = build_grid(Geometry(cantilever_mode="none"), 256, 96)
    f = solve_flow(g, None, 1e-4, PROPS)
    assert f.u_max / 1e-4 == pytest.approx(1.5, abs=0.03)
    # fully developed far from the inlet: u independent of x
    np.testing.assert_allclose(f.u[128], f.u[200], rtol=1e-6, atol=1e-12)
    jmax = np.argmax(f.u[128])
    assert abs(g.yc[jmax] - 50e-6) <= g.dy


def test_inlet_profile_flux(coarse_grid):
    prof = inlet_profile(coarse_grid, 1e-4)
    assert prof.sum() * coarse_grid.dy == pytest.approx(1e-4 * 100e-6, rel=1e-12)
    assert prof.min() > 0


def test_mass_balance_and_divergence(coupled_15v):
    grid, fields = coupled_15v
    f = fields.flow
    q_in, q_out = f.volume_flux()
    assert q_out == pytest.approx(q_in, rel=1e-6)
    assert f.scaled_divergence() <= 1e-6


def test_no_slip(coupled_15v):
    grid, fields = coupled_15v
    f = fields.flow
    walls_x = np.isin(grid.xkind, [FaceKind.WALL, FaceKind.INACTIVE])
    walls_y = ~np.isin(grid.ykind, [FaceKind.INTERIOR])
    assert not f.u[walls_x].any()
    assert not f.v[walls_y].any()


@pytest.mark.parametrize("side", [-1, 1])
def test_recirculation_above_gap(coupled_15v, side):
    # the vortex pair is mirror-symmetric about the gap midline, so u reverses
    # along vertical lines just either side of it
    grid, fields = coupled_15v
    f = fields.flow
    geo = grid.geometry
    x = geo.gap_center + side * geo.electrode_gap
    col = f.u[int(round(x / grid.dx))]
    inflow = f.inlet_mean
    assert col.max() > 2 * inflow and col.min() < -2 * inflow
    assert f.v_down_max > 1e-3


def test_stokes_linearity(coupled_15v):
    grid, fields = coupled_15v
    force = fields.force.scaled(1e-3)  # keeps the Reynolds number negligible
    f1 = solve_flow(grid, force, 0.0, PROPS)
    f2 = solve_flow(grid, force.scaled(2.0), 0.0, PROPS)
    scale = np.abs(f2.u).max()
    assert np.abs(f2.u - 2 * f1.u).max() <= 0.01 * scale
    assert np.abs(f2.v - 2 * f1.v).max() <= 0.01 * scale


def test_velocity_reported_components(coupled_15v):
    _, fields = coupled_15v
    f = fields.flow
    assert f.u_max == pytest.approx(f.speed().max())
    assert f.v_down_max == pytest.approx(-f.v.min())


def test_force_shape_checked(coarse_grid, empty_grid):
    from etstir.etforce import BodyForceField

    with pytest.raises(ValueError):
        solve_flow(coarse_grid, BodyForceField.zeros(empty_grid), 1e-4, PROPS)


def test_negative_inlet_rejected(coarse_grid):
    with pytest.raises(ValueError):
        solve_flow(coarse_grid, None, -1.0, PROPS)


def test_iteration_cap_reports_history(coupled_15v):
    grid, fields = coupled_15v
    with pytest.raises(SolverError) as info:
        solve_flow(grid, fields.force, 1e-4, PROPS, tol=1e-14, max_iter=2)
    assert len(info.value.history) == 2
