"""Path-simulation kernels.

The compiled extension ``_kernels`` is used when it is importable; otherwise,
or when ``VOLTEFACE_PURE_PYTHON`` is set to a non-empty value other than
``0``, the numpy implementation in ``_pykernels`` is used. Both consume the
same per-path random streams.
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _pykernels


def _compiled() -> ModuleType | None:
    try:
        return importlib.import_module(f"{__name__}._kernels")
    except ImportError:
        return None


def load_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``"cython"``, ``"python"`` or the default (``None``)."""
    if name == "python":
        return _pykernels
    compiled = _compiled()
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    if name is not None:
        raise ValueError(f"unknown backend {name!r}")
    if os.environ.get("VOLTEFACE_PURE_PYTHON", "") not in ("", "0") or compiled is None:
        return _pykernels
    return compiled


kernels = load_backend()
BACKEND = "python" if kernels is _pykernels else "cython"
HAVE_COMPILED = _compiled() is not None
