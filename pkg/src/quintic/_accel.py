"""Numba dispatch.

Kernels are written once as plain Python over numpy arrays.  When numba is
importable and ``QUINTIC_NUMBA`` is not set to ``0``, callers get the
``@njit`` compiled version; otherwise the pure-numpy fallback is used.
"""
from __future__ import annotations

import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and os.environ.get("QUINTIC_NUMBA", "1") not in ("0", "false", "no")


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is active, identity otherwise."""
    if args and callable(args[0]) and len(args) == 1 and not kwargs:
        return njit()(args[0])

    def deco(fn):
        if not USE_NUMBA:
            return fn
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _numba.njit(**kwargs)(fn)

    return deco


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
