"""Kernel backend selection: compiled extension when available.

The stepping loop calls three elementwise kernels (phase multiply,
nonlinear phase, finiteness scan). At import we pick the compiled
Cython implementation if it was built, otherwise the numpy fallback.
Set SPLITWAVE_BACKEND=python|cython to force a choice.
"""

import os

from . import _kernels_py

_requested = os.environ.get("SPLITWAVE_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "python", "cython"):
    raise ValueError(f"SPLITWAVE_BACKEND must be auto|python|cython, got {_requested!r}")

kernels = None
BACKEND_NAME = "python"
if _requested in ("auto", "cython"):
    try:
        from . import _kernels as _compiled

        kernels = _compiled
        BACKEND_NAME = "cython"
    except ImportError:
        if _requested == "cython":
            raise
if kernels is None:
    kernels = _kernels_py


def get_kernels(name=None):
    """Kernel module by name: None/"auto" -> selected, else python|cython."""
    if name in (None, "auto"):
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels as _compiled

        return _compiled
    raise ValueError(f"unknown backend {name!r}")
