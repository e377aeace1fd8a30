"""Hot inner loops, dispatched to the compiled extension when it imports.

The compiled module ``mdplab._ckernels`` is built from ``_ckernels.pyx`` by
``setup.py``. When it is missing (no compiler, or ``MDPLAB_NO_EXT=1`` at build
time) the numpy versions in ``_pykernels`` are used. Both expose the same four
functions with the same semantics; ``use_backend`` switches between them at
runtime, which the test-suite and benchmark rely on.
"""
import numpy as np

from . import _pykernels
from ._pykernels import PIVOT_TOL, SingularSystemError

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

__all__ = [
    "PIVOT_TOL",
    "SingularSystemError",
    "available_backends",
    "backend",
    "use_backend",
    "backup",
    "policy_sweeps",
    "gauss_solve",
    "pivot",
]

_impl = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return ["python"] + (["cython"] if _ckernels is not None else [])


def backend():
    """Name of the active backend, ``"cython"`` or ``"python"``."""
    return "cython" if _impl is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Select the kernel backend; returns the previously active name."""
    global _impl
    previous = backend()
    if name == "python":
        _impl = _pykernels
    elif name == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        _impl = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def backup(P, C, gamma, v):
    """One Bellman sweep. Returns ``(min over actions, q-table)``."""
    return _impl.backup(P, C, float(gamma), np.ascontiguousarray(v, dtype=float))


def policy_sweeps(P_pi, c_pi, gamma, v, sweeps):
    """Apply ``v <- c_pi + gamma P_pi v`` ``sweeps`` times."""
    return _impl.policy_sweeps(
        np.ascontiguousarray(P_pi, dtype=float),
        np.ascontiguousarray(c_pi, dtype=float),
        float(gamma),
        np.ascontiguousarray(v, dtype=float),
        int(sweeps),
    )


def gauss_solve(A, b):
    return _impl.gauss_solve(A, b)


def pivot(T, r, c):
    _impl.pivot(T, int(r), int(c))
