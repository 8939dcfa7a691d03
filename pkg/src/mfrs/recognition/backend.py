"""Kernel lane selection.

The hot loops (per-window HOG and pyramid scanning) exist twice: a
Cython extension and a numpy implementation. The extension is picked
when importable; MFRS_BACKEND=python forces the numpy lane (useful for
the backend benchmark and for debugging). Both lanes implement the same
arithmetic; within a lane results are bit-reproducible, across lanes
they agree to ~1e-9 (summation order and libm differ).
"""

import os

from . import _kernels_np

_native = None
if os.environ.get("MFRS_BACKEND", "auto") != "python":
    try:
        from . import _kernels_cy as _native
    except ImportError:
        _native = None

kernels = _native if _native is not None else _kernels_np


def backend_name():
    return "native" if kernels is _native and _native is not None else "python"


def native_kernels():
    """The compiled lane, or None if it was not built."""
    return _native


def python_kernels():
    return _kernels_np
