"""Single-case orchestration and parameter sweeps."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import __version__, _accel
from .electrostatics import EField, PotentialField, electric_field, solve_potential
from .errors import CouplingError, GeometryError
from .etforce import BodyForceField, compute_et_force
from .flow import FlowField, solve_flow
from .mesh import Geometry, Grid, build_grid
from .properties import DriveSpec, FluidProps, ReactionParams
from .thermal import TemperatureField, energy_balance, joule_heating, solve_temperature
from .transport import (ConcentrationField, ConcentrationStepper, SurfaceState,
                        mean_coverage)

log = logging.getLogger(__name__)

SWEEP_AXES = {
    "electrode_width": ("geometry", "electrode_width"),
    "gap": ("geometry", "electrode_gap"),
    "frequency": ("drive", "frequency"),
    "voltage": ("drive", "v_rms"),
}

NOT_REACHED = "not reached"


@dataclass(frozen=True)
class CaseConfig:
    geometry: Geometry = Geometry()
    nx: int = 256
    ny: int = 96
    props: FluidProps = FluidProps()
    reaction: ReactionParams = ReactionParams()
    drive: DriveSpec = DriveSpec()
    inlet_mean: float = 1.0e-4
    steady_fraction: float = 0.99
    t_max: float = 2000.0
    dt: float = 0.5
    sample_interval: float = 2.0
    thermal_walls: str = "adiabatic"
    thermal_convection: bool = True
    potential_tol: float = 1e-8
    temperature_tol: float = 1e-8
    flow_tol: float = 1e-6
    coupling_tol: float = 1e-4
    coupling_max_iter: int = 50
    label: str = ""

    def validate(self) -> None:
        if not 0 < self.steady_fraction < 1:
            raise ValueError("steady_fraction must lie in (0, 1)")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.dt > 0 or not self.sample_interval > 0:
            raise ValueError("dt and sample_interval must be positive")
        if self.inlet_mean < 0:
            raise ValueError("inlet_mean must be non-negative")
        self.geometry.validate()
        self.props.validate()
        self.reaction.validate()
        self.drive.validate()

    def with_value(self, section: str, key: str, value) -> "CaseConfig":
        if section in ("geometry", "props", "reaction", "drive"):
            return replace(self, **{section: replace(getattr(self, section), **{key: value})})
        return replace(self, **{key: value})


class CoupledFields(NamedTuple):
    potential: PotentialField
    efield: EField
    temperature: TemperatureField
    force: BodyForceField
    flow: FlowField
    heat: np.ndarray
    iterations: int
    history: list


@dataclass(eq=False)
class CaseResult:
    """Outcome of one case.

    ``series`` columns: time (s), mean coverage (mol/m^2), min and max bulk
    concentration (mol/m^3). ``t_steady`` is ``None`` when the threshold was
    not reached within ``t_max``.
    """

    series: np.ndarray = field(repr=False)
    dT_max: float
    u_max: float
    v_down_max: float
    t_steady: float | None
    ab_eq: float
    metadata: dict = field(default_factory=dict, repr=False)
    checks: dict = field(default_factory=dict, repr=False)
    coupling_iterations: int = 0
    wall_time: float = 0.0
    fields: CoupledFields | None = field(default=None, repr=False)
    concentration: np.ndarray | None = field(default=None, repr=False)
    coverage: np.ndarray | None = field(default=None, repr=False)

    @property
    def t_steady_label(self) -> str:
        return NOT_REACHED if self.t_steady is None else repr(self.t_steady)


def couple_steady_fields(grid: Grid, config: CaseConfig) -> CoupledFields:
    """Fixed point of temperature, electrothermal force and flow.

    The potential does not depend on temperature or flow and is solved once.
    The loop stops when both ``u_max`` and ``dT_max`` change by less than
    ``config.coupling_tol`` (relative, with absolute floors of 1e-6 K and
    1e-6 of the inlet speed) between sweeps.
    """
    props, drive = config.props, config.drive
    phi = solve_potential(grid, drive.v_rms, tol=config.potential_tol)
    e = electric_field(phi, grid)
    q = joule_heating(e, props)
    flow = solve_flow(grid, None, config.inlet_mean, props, tol=config.flow_tol)
    prev = (flow.u_max, 0.0)
    history = [prev]
    # absolute floors keep round-off sized values (e.g. dT at 0 V) from
    # registering as large relative changes
    floors = (1e-6 * max(config.inlet_mean, 1e-12), 1e-6)
    for it in range(1, config.coupling_max_iter + 1):
        temp = solve_temperature(grid, q, flow if config.thermal_convection else None,
                                 props, tol=config.temperature_tol,
                                 walls=config.thermal_walls)
        force = compute_et_force(e, temp, props, drive)
        flow = solve_flow(grid, force, config.inlet_mean, props, tol=config.flow_tol,
                          initial=flow)
        cur = (flow.u_max, temp.dT_max)
        history.append(cur)
        changes = [abs(c - p) / max(abs(c), f) for c, p, f in zip(cur, prev, floors)]
        log.debug("coupling sweep %d: u_max=%.4e dT_max=%.4e", it, *cur)
        if max(changes) < config.coupling_tol:
            return CoupledFields(phi, e, temp, force, flow, q, it, history)
        prev = cur
    raise CouplingError(
        f"coupling did not converge in {config.coupling_max_iter} sweeps",
        residual=max(changes), history=history)


def detect_steady_state(series, ab_eq: float, fraction: float) -> float | None:
    """First time the coverage reaches ``fraction * ab_eq``.

    ``series`` is a sequence of ``(t, coverage)`` pairs (extra columns are
    ignored). The crossing is interpolated linearly between the bracketing
    samples; ``None`` means never.
    """
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise ValueError("empty series")
    s = s.reshape(len(s), -1)
    t, c = s[:, 0], s[:, 1]
    if ab_eq <= 0:
        return None
    thr = fraction * ab_eq
    hits = np.nonzero(c >= thr)[0]
    if hits.size == 0:
        return None
    k = hits[0]
    if k == 0:
        return float(t[0])
    t0, t1, c0, c1 = t[k - 1], t[k], c[k - 1], c[k]
    return float(t0 + (thr - c0) / (c1 - c0) * (t1 - t0))


def case_metadata(config: CaseConfig) -> dict:
    from .config import config_to_dict

    return {
        "etstir_version": __version__,
        "kernel_backend": _accel.backend(),
        "config": config_to_dict(config),
        "derived": {
            "eps_F_per_m": config.props.eps,
            "omega_rad_per_s": config.drive.omega,
            "electrode_potentials_V": [0.5 * config.drive.v_rms, -0.5 * config.drive.v_rms],
            "ab_eq_mol_per_m2": config.reaction.ab_eq,
            "wellmixed_rate_per_s": config.reaction.rate,
        },
        "assumptions": [
            "v_rms is the rms potential difference; electrodes at +v_rms/2 and -v_rms/2",
            "cp and k_thermal default to water at 300 K",
            "channel length/height and cantilever mounting are configurable defaults",
            "channel initially filled with analyte at a_inlet; surface initially empty",
        ],
    }


def run_case(config: CaseConfig, keep_fields: bool = False) -> CaseResult:
    """Couple the steady fields, then integrate binding on the frozen flow
    until the mean coverage reaches ``steady_fraction * ab_eq`` or ``t_max``."""
    config.validate()
    t_start = time.perf_counter()
    grid = build_grid(config.geometry, config.nx, config.ny)
    if len(grid.reactive) == 0:
        raise GeometryError("the configured geometry has no reactive faces")
    fields = couple_steady_fields(grid, config)
    params = config.reaction
    ab_eq = params.ab_eq
    threshold = config.steady_fraction * ab_eq

    stepper = ConcentrationStepper(grid, fields.flow, params, config.props, config.dt)
    conc = ConcentrationField.uniform(grid, params.a_inlet)
    surface = SurfaceState.empty(grid)
    amin, amax = conc.extrema()
    rows = [(0.0, mean_coverage(surface), amin, amax)]
    worst_balance = 0.0
    lo, hi = amin, amax
    ab_lo, ab_hi = 0.0, 0.0
    t = 0.0
    next_sample = config.sample_interval
    eps_t = 1e-9 * config.sample_interval
    reached = False
    while t < config.t_max - eps_t and not reached:
        conc, surface, _ = stepper.step(conc, surface)
        t += stepper.dt
        worst_balance = max(worst_balance, abs(stepper.last_balance["residual"]))
        amin, amax = conc.extrema()
        lo, hi = min(lo, amin), max(hi, amax)
        ab_lo, ab_hi = min(ab_lo, surface.ab.min()), max(ab_hi, surface.ab.max())
        if t >= next_sample - eps_t:
            cov = mean_coverage(surface)
            rows.append((t, cov, amin, amax))
            next_sample += config.sample_interval
            reached = ab_eq > 0 and cov >= threshold
    series = np.array(rows)
    t_steady = detect_steady_state(series, ab_eq, config.steady_fraction)

    flow, temp, phi = fields.flow, fields.temperature, fields.potential
    checks = {
        "species_balance_max": worst_balance,
        "a_min": lo,
        "a_max": hi,
        "a_inlet": params.a_inlet,
        "ab_min": ab_lo,
        "ab_max": ab_hi,
        "b0": params.b0,
        "clamped_faces": surface.clamped,
        "phi_min": float(phi.phi[grid.fluid].min()),
        "phi_max": float(phi.phi[grid.fluid].max()),
        "T_min": float(temp.t[grid.fluid].min()),
        "divergence_scaled": flow.scaled_divergence(),
        "energy_balance": energy_balance(temp, fields.heat,
                                         flow if config.thermal_convection else None,
                                         config.props)["residual"],
        "dt_final": stepper.dt,
    }
    result = CaseResult(
        series=series, dT_max=temp.dT_max, u_max=flow.u_max,
        v_down_max=flow.v_down_max, t_steady=t_steady, ab_eq=ab_eq,
        metadata=case_metadata(config), checks=checks,
        coupling_iterations=fields.iterations,
        wall_time=time.perf_counter() - t_start,
        fields=fields if keep_fields else None,
        concentration=conc.a if keep_fields else None,
        coverage=surface.ab if keep_fields else None)
    log.info("case %s: dT_max=%.3f K u_max=%.3e m/s t_steady=%s (%.1f s)",
             config.label or "-", result.dT_max, result.u_max,
             result.t_steady_label, result.wall_time)
    return result


@dataclass(eq=False)
class SweepRow:
    value: float
    config: CaseConfig = field(repr=False)
    result: CaseResult | None = field(default=None, repr=False)
    error: str | None = None


@dataclass(eq=False)
class SweepTable:
    axis: str
    rows: list

    def column(self, name: str) -> list:
        return [getattr(r.result, name) if r.result is not None else None for r in self.rows]

    @property
    def values(self) -> list:
        return [r.value for r in self.rows]


def sweep_configs(base: CaseConfig, axis: str, values) -> list:
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    section, key = SWEEP_AXES[axis]
    out = []
    for v in values:
        cfg = base.with_value(section, key, float(v))
        out.append(replace(cfg, label=f"{axis}={float(v):g}"))
    return out


def _run_row(cfg, keep_fields=False):
    try:
        return run_case(cfg, keep_fields=keep_fields), None
    except Exception as exc:  # recorded in the row; the sweep carries on
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(base: CaseConfig, axis: str, values, workers: int = 1,
              keep_fields: bool = False) -> SweepTable:
    """Run one independent case per value; rows keep the input order."""
    values = list(values)
    configs = sweep_configs(base, axis, values)
    keep = [keep_fields] * len(configs)
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
            outcomes = list(pool.map(_run_row, configs, keep))
    else:
        outcomes = [_run_row(c, k) for c, k in zip(configs, keep)]
    rows = [SweepRow(float(v), cfg, res, err)
            for v, cfg, (res, err) in zip(values, configs, outcomes)]
    return SweepTable(axis, rows)
