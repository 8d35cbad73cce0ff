"""Select the compiled relaxation kernel when it is importable, else the Python one.

Set ``WORKSWORLD_PURE=1`` to force the pure-Python implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
impl = _kernels_py

if os.environ.get("WORKSWORLD_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        impl = _compiled
        BACKEND = "cython"

INF = _kernels_py.INF


def get(backend: str | None = None):
    """Return the kernel module for `backend` ("cython", "python" or None for the default)."""
    if backend is None:
        return impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels as compiled  # type: ignore[attr-defined]
        return compiled
    raise ValueError(f"unknown kernel backend {backend!r}")
