"""Backend selection for the hot kernels.

Kernels are written once as plain Python over numpy arrays and compiled with
numba when it is importable and not disabled.  Set ``SLOTFLOW_DISABLE_NUMBA=1``
to force the pure-numpy fallbacks.  The flag is read at call time so tests
and benchmarks can flip it per run.
"""
from __future__ import annotations

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


ENV_FLAG = "SLOTFLOW_DISABLE_NUMBA"
BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    if not HAVE_NUMBA:
        return "numpy"
    if os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba"


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend == "numba" and not HAVE_NUMBA:
        return "numpy"
    return backend
