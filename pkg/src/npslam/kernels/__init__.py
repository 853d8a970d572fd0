"""Hot-kernel backend selection.

The numba backend is used by default; set NPSLAM_DISABLE_NUMBA=1 to force
the pure-numpy fallback (also used automatically when numba is not
importable). Both backends implement identical contracts; see
benchmarks/kernel_bench.py for a timing comparison.
"""

import os

from . import _numpy as numpy_backend


def _numba_disabled() -> bool:
    return os.environ.get("NPSLAM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


numba_backend = None
if not _numba_disabled():
    try:
        from . import _numba as numba_backend
    except ImportError:
        numba_backend = None

_impl = numba_backend if numba_backend is not None else numpy_backend

USING_NUMBA = _impl is not numpy_backend
BACKEND_NAME = "numba" if USING_NUMBA else "numpy"

wrap_angles = numpy_backend.wrap_angles
odom_terms = _impl.odom_terms
odom_residuals = _impl.odom_residuals
meas_terms = _impl.meas_terms
meas_residuals = _impl.meas_residuals
sweep_assign = _impl.sweep_assign

__all__ = [
    "USING_NUMBA",
    "BACKEND_NAME",
    "numpy_backend",
    "numba_backend",
    "wrap_angles",
    "odom_terms",
    "odom_residuals",
    "meas_terms",
    "meas_residuals",
    "sweep_assign",
]
