"""Compare the numba-compiled and pure-numpy kernels.

Runs both flavours of the coefficient assembly and force kernels on the
production grids, checks they agree, and prints the timings. The solver-level
comparison re-runs one coupled field solve in a subprocess with
``ETSTIR_DISABLE_NUMBA=1`` to exercise the env switch end to end.

    python3 benchmarks/bench_kernels.py [--repeat N] [--skip-solve]
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from etstir import _accel, kernels
from etstir.fv import bc_table
from etstir.mesh import FaceKind, Geometry, build_grid

SOLVE_SNIPPET = """
import time
from etstir import _accel
from etstir.driver import CaseConfig, couple_steady_fields
from etstir.mesh import build_grid
cfg = CaseConfig()
grid = build_grid(cfg.geometry, cfg.nx, cfg.ny)
couple_steady_fields(grid, cfg)  # warm-up (numba compile / cache load)
t0 = time.perf_counter()
f = couple_steady_fields(grid, cfg)
print(_accel.backend(), time.perf_counter() - t0, f.flow.u_max, f.temperature.dT_max)
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_grid(nx, ny, repeat):
    grid = build_grid(Geometry(), nx, ny)
    rng = np.random.default_rng(0)
    uf = rng.normal(size=(nx + 1, ny)) * 1e-3
    vf = rng.normal(size=(nx, ny + 1)) * 1e-3
    bc_type, bc_value = bc_table({FaceKind.INLET: 1.0, FaceKind.ELECTRODE_A: 0.5},
                                 outflow=[FaceKind.OUTLET])
    args = (grid.fluid, grid.xkind, grid.ykind, bc_type, bc_value, uf, vf,
            0.6, 4.184e6, grid.dx, grid.dy)
    ex, ey = rng.normal(size=(nx + 1, ny)), rng.normal(size=(nx, ny + 1))
    gtx, gty = rng.normal(size=(nx + 1, ny)), rng.normal(size=(nx, ny + 1))
    xa = grid.xkind == FaceKind.INTERIOR
    ya = grid.ykind == FaceKind.INTERIOR
    fargs = (ex, ey, gtx, gty, xa, ya, -1.5e-11, 7.1e-13)

    rows = []
    for name, loops, vec, a in (("scalar_coefficients", kernels.scalar_coefficients_loops,
                                 kernels.scalar_coefficients_numpy, args),
                                ("et_force", kernels.et_force_loops,
                                 kernels.et_force_numpy, fargs)):
        loops(*a)  # compile
        t_loop, out_l = best_of(lambda: loops(*a), repeat)
        t_vec, out_v = best_of(lambda: vec(*a), repeat)
        err = max(float(np.max(np.abs(x - y))) / max(float(np.max(np.abs(y))), 1e-300)
                  for x, y in zip(out_l, out_v))
        rows.append((name, nx, ny, t_loop, t_vec, err))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-solve", action="store_true")
    args = ap.parse_args(argv)

    label = "loops (numba)" if _accel.HAVE_NUMBA else "loops (interpreted)"
    print(f"{'kernel':22s} {'grid':>9s} {label:>20s} {'numpy':>10s} {'speedup':>8s} "
          f"{'max rel diff':>13s}")
    for nx, ny in ((256, 96), (512, 192)):
        for name, gx, gy, tl, tv, err in bench_grid(nx, ny, args.repeat):
            print(f"{name:22s} {gx:4d}x{gy:<4d} {tl * 1e3:17.2f} ms {tv * 1e3:7.2f} ms "
                  f"{tv / tl:7.2f}x {err:13.2e}")

    if args.skip_solve:
        return 0
    print("\ncoupled steady-field solve, default case at 256x96:")
    for disable in ("0", "1"):
        env = dict(os.environ, ETSTIR_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  backend={out[0]:6s} {float(out[1]):7.2f} s  u_max={float(out[2]):.6e} "
              f"dT_max={float(out[3]):.6e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
