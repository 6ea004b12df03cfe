"""Backend selection for the orbit kernels.

The compiled extension is used when it imports; ``PLANARSYM_BACKEND=python``
forces the pure-Python reference implementation.
"""

from __future__ import annotations

import os

from . import _pykernels

_forced = os.environ.get("PLANARSYM_BACKEND", "").strip().lower()

try:
    if _forced == "python":
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _backend

    BACKEND = "cython"
except ImportError:
    _backend = _pykernels
    BACKEND = "python"

UNRESOLVED = _pykernels.UNRESOLVED
TO_FIXED = _pykernels.TO_FIXED
TO_INFINITY = _pykernels.TO_INFINITY
PERIODIC = _pykernels.PERIODIC
NOTE_NONE = _pykernels.NOTE_NONE
NOTE_DOMAIN = _pykernels.NOTE_DOMAIN
NOTE_NONFINITE = _pykernels.NOTE_NONFINITE
NOTE_MAXITER = _pykernels.NOTE_MAXITER
TRAPPED = _pykernels.TRAPPED
ESCAPED = _pykernels.ESCAPED
UNDECIDED = _pykernels.UNDECIDED
FAILED = _pykernels.FAILED


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"``/``"python"``); default is the active one."""
    if name is None:
        return _backend
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def compile_map(m, backend=None):
    """Compile a ``MapSpec`` for the given (or active) backend."""
    mod = backend or _backend
    return mod.CompiledMap(m.program())
