"""Backend selection for the hot integration kernels.

``SAPKIT_BACKEND=numpy`` forces the vectorized numpy path; anything else
(default ``numba``) uses the compiled kernels when numba imports cleanly.
"""
from __future__ import annotations

import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

BACKENDS = ("numba", "numpy")

HAVE_NUMBA = _numba is not None


def _default_backend() -> str:
    name = os.environ.get("SAPKIT_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"SAPKIT_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_backend = _default_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch the process-wide backend, returning the previous one."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    previous, _backend = _backend, name
    return previous


def resolve(backend: str | None) -> str:
    if backend is None:
        return _backend
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return backend


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator when numba is absent."""
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba.njit(*args, **kwargs)
