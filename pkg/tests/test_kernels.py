import numpy as np
import pytest
from hypothesis import given, strategies as st

from shadowlab import kernels
from shadowlab.maps import SmoothMap

try:
    kernels.backend_module("compiled")
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")

MAPS = [SmoothMap.logistic(4.0), SmoothMap.logistic(3.7), SmoothMap.cubic(),
        SmoothMap.doubling(), SmoothMap.sine(0.95), SmoothMap.arnold(0.2, 0.9)]
POLY = [m for m in MAPS if m.kind == 0]


def test_backend_names():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.backend_module("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


@needs_compiled
@pytest.mark.parametrize("fmap", MAPS, ids=lambda f: f.label)
def test_iterate_backends_agree(fmap):
    c = kernels.iterate(fmap, 0.1234, 2000, backend="compiled")
    p = kernels.iterate(fmap, 0.1234, 2000, backend="python")
    if fmap.kind == 0:
        # polynomial maps are evaluated operation for operation
        assert np.array_equal(c[0], p[0]) and np.array_equal(c[1], p[1])
    else:
        # libm sin/cos may differ in the last bit, which chaos amplifies
        assert np.allclose(c[0][:20], p[0][:20], atol=1e-9)
    assert np.allclose(c[2][:20], p[2][:20], rtol=4e-16, atol=4e-16)
    assert c[3] == p[3]


@needs_compiled
@pytest.mark.parametrize("fmap", POLY, ids=lambda f: f.label)
def test_cover_backends_agree(fmap):
    pts = fmap.grid(3000)
    for n, eps in ((1, 0.1), (5, 0.1), (8, 0.05)):
        rc, cc = kernels.sweep_cover(fmap, pts, n, eps, backend="compiled")
        rp, cp = kernels.sweep_cover(fmap, pts, n, eps, backend="python")
        assert rc == rp and np.array_equal(cc, cp)
        assert np.array_equal(kernels.adjacent_gaps(fmap, pts, n, backend="compiled"),
                              kernels.adjacent_gaps(fmap, pts, n, backend="python"))
        assert np.array_equal(kernels.separated_greedy(fmap, pts, n, eps, backend="compiled"),
                              kernels.separated_greedy(fmap, pts, n, eps, backend="python"))


@needs_compiled
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=60), st.integers(1, 10))
def test_trajectories_backends_agree(xs, n):
    f = SmoothMap.logistic(4.0)
    pts = np.array(sorted(xs))
    assert np.array_equal(kernels.trajectories(f, pts, n, backend="compiled"),
                          kernels.trajectories(f, pts, n, backend="python"))


@pytest.mark.parametrize("backend", ["python"] + (["compiled"] if HAVE_COMPILED else []))
def test_sweep_cover_is_a_cover(backend):
    f = SmoothMap.logistic(4.0)
    pts = f.grid(800)
    n, eps = 6, 0.1
    r, centers = kernels.sweep_cover(f, pts, n, eps, backend=backend)
    assert r == centers.size
    traj = kernels.trajectories(f, pts, n, backend=backend)
    # contiguous blocks: each point is within eps of the last center at or before it
    owner = np.searchsorted(centers, np.arange(pts.size), side="right") - 1
    d = np.abs(traj - traj[centers[owner]]).max(axis=1)
    assert np.all(d < eps)


@pytest.mark.parametrize("backend", ["python"] + (["compiled"] if HAVE_COMPILED else []))
def test_separated_set_is_separated(backend):
    f = SmoothMap.doubling()
    pts = f.grid(500)
    n, eps = 4, 0.1
    idx = kernels.separated_greedy(f, pts, n, eps, backend=backend)
    traj = kernels.trajectories(f, pts[idx], n, backend=backend)
    for i in range(idx.size):
        d = np.abs(traj[i] - traj[i + 1:])
        d = np.minimum(d, 1.0 - d).max(axis=1)
        assert np.all(d >= eps)
