"""Optional numba acceleration.

Hot kernels are written in the numba-compatible subset of Python and wrapped
with :func:`njit`. Setting ``COLDIST_DISABLE_NUMBA=1`` (or running without
numba installed) leaves them as plain Python/numpy functions.
"""

import os

_DISABLED = os.environ.get("COLDIST_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - exercised via env flag in a subprocess
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(*args, **kwargs):
    """``numba.njit`` when acceleration is on, identity decorator otherwise."""
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def py_func(fn):
    """Return the undecorated Python function behind a kernel."""
    return getattr(fn, "py_func", fn)
