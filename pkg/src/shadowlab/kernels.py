"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy/pure-Python fallback in ``_pykernels`` is used.  Setting the
environment variable ``SHADOWLAB_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SHADOWLAB_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels


def backend_module(name=None):
    """Kernel module by name (``"compiled"`` or ``"python"``); default is active."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _spec(fmap):
    co = fmap.coefficients if fmap.coefficients else (0.0,)
    dco = fmap._dcoeffs[1] if fmap.coefficients else (0.0,)
    params = fmap.params if fmap.params else (0.0,)
    return fmap.kind, int(fmap.is_circle), co, dco, params


def iterate(fmap, x0, n, clamp=False, tol=1e-12, backend=None):
    kind, circ, co, dco, pa = _spec(fmap)
    return backend_module(backend).iterate(kind, circ, co, dco, pa, float(x0), int(n), clamp, tol)


def trajectories(fmap, pts, n, backend=None):
    kind, circ, co, _, pa = _spec(fmap)
    return backend_module(backend).trajectories(kind, circ, co, pa, pts, int(n))


def adjacent_gaps(fmap, pts, n, backend=None):
    kind, circ, co, _, pa = _spec(fmap)
    return backend_module(backend).adjacent_gaps(kind, circ, co, pa, pts, int(n))


def sweep_cover(fmap, pts, n, eps, backend=None):
    kind, circ, co, _, pa = _spec(fmap)
    return backend_module(backend).sweep_cover(kind, circ, co, pa, pts, int(n), float(eps))


def separated_greedy(fmap, pts, n, eps, backend=None):
    traj = trajectories(fmap, pts, n, backend=backend)
    return backend_module(backend).separated_greedy(traj, pts, float(eps), bool(fmap.is_circle))
