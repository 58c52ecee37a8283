"""Kernel backend selection: the compiled extension when built, NumPy otherwise."""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

kernels = _compiled if _compiled is not None else _kernels_py
BACKEND = kernels.NAME


def available_kernels():
    """Name -> module map of the kernel implementations importable here."""
    out = {_kernels_py.NAME: _kernels_py}
    if _compiled is not None:
        out[_compiled.NAME] = _compiled
    return out
