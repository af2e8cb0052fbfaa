"""Kernel backend selection.

The per-group kernels in :mod:`offgrid_doa.prox` have a numba implementation
and a pure-numpy one. Numba is used when it imports cleanly unless the
environment variable ``OFFGRID_DOA_NUMBA`` is set to ``0``/``false``/``no``.
The choice is made once, at import time.
"""
import os

_FLAG = os.environ.get("OFFGRID_DOA_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

HAS_NUMBA = NUMBA_AVAILABLE and NUMBA_REQUESTED
BACKEND = "numba" if HAS_NUMBA else "numpy"


def kernels():
    """Return the active kernel module."""
    if HAS_NUMBA:
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod
