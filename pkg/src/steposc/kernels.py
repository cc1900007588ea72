"""Hot loops, compiled when possible.

The Cython extension ``steposc._kernels`` is used if it was built; otherwise
(or when the environment variable ``STEPOSC_PURE_PYTHON`` is set to a
non-empty value other than ``0``) the pure-Python module is used.  Both return
identical results up to floating-point evaluation order.
"""
import os

import numpy as np

from . import _kernels_py
from .potentials import PotentialSpec

STATUS_OK = _kernels_py.STATUS_OK
STATUS_CORNER = _kernels_py.STATUS_CORNER
STATUS_OUT_OF_TABLE = _kernels_py.STATUS_OUT_OF_TABLE


def _load_backend():
    if os.environ.get("STEPOSC_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "cython"


_backend, BACKEND = _load_backend()


def axis_params(V: PotentialSpec):
    """Flatten a potential into the tuple the kernels consume."""
    if V.is_harmonic:
        return (0, V.omega, V.load, 0.0, np.zeros(0), np.zeros((4, 0)))
    interp = V._interp
    return (1, 0.0, 0.0, V.center, np.asarray(interp.x, dtype=float),
            np.asarray(interp.c, dtype=float))


def integrate_impacts(y0, t0, params1, params2, q1w, q2w, dt, t_end, max_impacts,
                      corner_tol, backend=None):
    """Run the impact integrator; returns ``(rows, status)``, rows as an (n, 6) array."""
    mod = {None: _backend, "python": _kernels_py}.get(backend)
    if mod is None:
        from . import _kernels as mod
    rows, status = mod.integrate_impacts(np.asarray(y0, dtype=float), float(t0), params1, params2,
                                         float(q1w), float(q2w), float(dt), float(t_end),
                                         int(max_impacts), float(corner_tol))
    return np.asarray(rows, dtype=float).reshape(-1, 6), int(status)
