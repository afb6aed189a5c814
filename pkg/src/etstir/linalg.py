"""Sparse assembly and linear solves shared by the field solvers."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError


def five_point_matrix(ap, aw, ae, as_, an) -> sp.csr_matrix:
    """CSR matrix of ``ap*phi_P - aw*phi_W - ae*phi_E - as*phi_S - an*phi_N``.

    Unknowns are cell values flattened in C order of an ``(nx, ny)`` array.
    Zero neighbour coefficients are dropped, so edge cells never reference
    cells outside the grid.
    """
    nx, ny = ap.shape
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [ap.ravel()]
    for coef, sl_p, sl_n in (
        (aw, np.s_[1:, :], np.s_[:-1, :]),
        (ae, np.s_[:-1, :], np.s_[1:, :]),
        (as_, np.s_[:, 1:], np.s_[:, :-1]),
        (an, np.s_[:, :-1], np.s_[:, 1:]),
    ):
        c = coef[sl_p]
        nz = c != 0
        rows.append(idx[sl_p][nz])
        cols.append(idx[sl_n][nz])
        vals.append(-c[nz])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))


def pcg(a: sp.spmatrix, b: np.ndarray, tol: float, maxiter: int = 50_000,
        x0: np.ndarray | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for an SPD system.

    Converged when ``||b - A x|| <= tol * ||b||``.
    """
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b)
    d = a.diagonal()
    if np.any(d <= 0):
        raise SolverError("matrix is not positive definite on its diagonal")
    m = spla.LinearOperator(a.shape, matvec=lambda r: r / d, dtype=float)
    x, info = spla.cg(a, b, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=m)
    res = float(np.linalg.norm(b - a @ x)) / bnorm
    if info != 0 or res > tol * (1 + 1e-6):
        raise SolverError(
            f"conjugate gradients stopped at relative residual {res:.3e} (info={info})",
            residual=res)
    return x


def direct(a: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    """Sparse LU solve with a finiteness check."""
    try:
        x = spla.spsolve(a.tocsc(), b)
    except RuntimeError as exc:  # singular factor
        raise SolverError(f"sparse LU failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("sparse LU produced non-finite values")
    return x


def factorize(a: sp.spmatrix):
    try:
        return spla.splu(a.tocsc())
    except RuntimeError as exc:
        raise SolverError(f"sparse LU failed: {exc}") from exc
