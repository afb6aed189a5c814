"""Optional numba acceleration.

Kernels in :mod:`etstir.kernels` come in two flavours: explicit loops that are
compiled with ``numba.njit`` and vectorised numpy code. The loop versions are
used when numba imports cleanly and ``ETSTIR_DISABLE_NUMBA`` is unset (or set
to ``0``); otherwise everything runs on the numpy path.
"""
from __future__ import annotations

import os

_flag = os.environ.get("ETSTIR_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by ETSTIR_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
