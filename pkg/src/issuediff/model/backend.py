"""Kernel backend selection.

The hot tree-training loops exist twice: a compiled extension
(model/_kernels, built from the .pyx source when Cython and a C
compiler are available) and a pure-NumPy fallback (model/kernels_py)
with identical semantics. Selection order: the ISSUEDIFF_KERNELS
environment variable ("compiled" or "python"), else the compiled
module when importable, else the fallback.
"""

from __future__ import annotations

import os
from typing import Optional

_COMPILED = "compiled"
_PYTHON = "python"

_cached = None


def get_kernels(force: Optional[str] = None):
    """Return the kernel module. `force` overrides the environment."""
    global _cached
    choice = force or os.environ.get("ISSUEDIFF_KERNELS", "")
    if choice not in ("", "auto", _COMPILED, _PYTHON):
        raise ValueError(
            f"unknown kernel backend {choice!r}; use 'compiled' or 'python'"
        )
    if choice == _PYTHON:
        from . import kernels_py

        return kernels_py
    if choice == _COMPILED:
        from . import _kernels

        return _kernels
    if _cached is None:
        try:
            from . import _kernels as mod
        except ImportError:
            from . import kernels_py as mod
        _cached = mod
    return _cached


def backend_name() -> str:
    return get_kernels().BACKEND_NAME
