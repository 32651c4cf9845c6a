"""Numba acceleration switch.

Hot numeric kernels live in :mod:`peakfdr._kernels` in two interchangeable
implementations: numba ``@njit``-compiled loops (the default) and vectorized
pure-numpy code. Set ``PEAKFDR_DISABLE_NUMBA=1`` to select the numpy path,
e.g. on machines where numba is unavailable or JIT warm-up is unwanted.
``benchmarks/bench_kernels.py`` times one path against the other.
"""

from __future__ import annotations

import os


def _numba_wanted() -> bool:
    flag = os.environ.get("PEAKFDR_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no", "off")


NUMBA_ENABLED = False
if _numba_wanted():
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but be lenient
        pass


if NUMBA_ENABLED:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return _numba_njit(**kwargs)
        return _numba_njit(**kwargs)(func)

else:

    def njit(func=None, **kwargs):
        """No-op decorator used when the JIT path is disabled."""
        if func is None:
            return lambda f: f
        return func
