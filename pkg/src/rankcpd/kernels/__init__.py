"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time. Set ``RANKCPD_DISABLE_NUMBA=1``
to force the numpy path (numba is also skipped when it cannot be imported).
Both backends expose the same functions with identical semantics:

``linear_assignment(cost)``
    Row-to-column assignment minimising total cost (shortest augmenting path).
``gibbs_kernel(f, g, cost, eps, floor)``
    ``exp((f_i + g_j - cost_ij) / eps)`` with exponents at or below ``floor``
    flushed to exactly zero.
``squared_distances(a, b)`` / ``distances(a, b)``
    Pairwise squared / plain Euclidean distances.
"""

import os

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("RANKCPD_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import _numba
    except ImportError:  # numba missing or broken
        pass
    else:
        BACKEND = "numba"
        _impl = _numba

linear_assignment = _impl.linear_assignment
gibbs_kernel = _impl.gibbs_kernel
squared_distances = _impl.squared_distances
distances = _impl.distances

__all__ = [
    "BACKEND",
    "linear_assignment",
    "gibbs_kernel",
    "squared_distances",
    "distances",
]
