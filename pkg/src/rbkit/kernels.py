"""Backend dispatch for the hot solver kernels.

Two interchangeable implementations exist: a numba-jitted one (default when
numba is importable) and a pure-numpy fallback. Set RBKIT_BACKEND=numpy or
RBKIT_BACKEND=numba to force one; see benchmarks/backend_bench.py for a
speed comparison.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_BACKENDS = {"numpy": _kernels_numpy}
try:
    from . import _kernels_numba

    _BACKENDS["numba"] = _kernels_numba
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    pass


def default_backend_name() -> str:
    env = os.environ.get("RBKIT_BACKEND", "").strip().lower()
    if env:
        if env not in _BACKENDS:
            known = ", ".join(sorted(_BACKENDS))
            raise ValueError(f"RBKIT_BACKEND={env!r} unknown (available: {known})")
        return env
    return "numba" if "numba" in _BACKENDS else "numpy"


def get_backend(name: str | None = None):
    """Kernel module for the requested backend (default per env/installation)."""
    if name is None:
        name = default_backend_name()
    try:
        return _BACKENDS[name]
    except KeyError:
        known = ", ".join(sorted(_BACKENDS))
        raise ValueError(f"unknown backend {name!r} (available: {known})") from None
