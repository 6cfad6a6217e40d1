"""Kernel dispatch: numba-jitted hot loops with a pure-numpy fallback.

Set CIRCLECOVER_NO_NUMBA=1 to force the numpy path (and to compare both,
see benchmarks/bench_kernels.py).
"""

import os

from . import numpy_impl

_flag = os.environ.get("CIRCLECOVER_NO_NUMBA", "").strip().lower()
_want_numba = _flag not in ("1", "true", "yes")

if _want_numba:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:  # numba missing or broken: degrade silently
        _impl = numpy_impl
        BACKEND = "numpy"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

kahan_cumsum = _impl.kahan_cumsum
cover_trajectory = _impl.cover_trajectory
point_first_hits = _impl.point_first_hits
log_survival_partials = _impl.log_survival_partials
ball_mass_array = _impl.ball_mass_array
