import os

import numpy as np
import pytest

from gasket_solenoid import kernels
from gasket_solenoid.backend import ENV_VAR, HAS_NUMBA, backend_name, use_numba


@pytest.fixture
def force_backend(monkeypatch):
    def setter(name):
        monkeypatch.setenv(ENV_VAR, name)

    return setter


def test_backend_flag(force_backend):
    force_backend("numpy")
    assert not use_numba()
    assert backend_name() == "numpy"
    force_backend("nonsense")
    with pytest.raises(ValueError):
        use_numba()


def _sample_inputs():
    corners = kernels.subdivide_corners(7, 1 << 7)
    a = corners[:, 0] + (1 << 7)  # shift into the level-1 branch region
    b = corners[:, 1].copy()
    return a, b


@pytest.mark.skipif(not HAS_NUMBA, reason="numba unavailable")
def test_backends_agree(force_backend):
    results = {}
    for name in ("numba", "numpy"):
        force_backend(name)
        corners = kernels.subdivide_corners(6, 64)
        a, b = _sample_inputs()
        da, db = kernels.descend_scaled(a, b, 1, 0, 1 << 7)
        vals = kernels.eval_poly_scaled(
            da, db, 1 << 7, np.array([1, 0, 2]), np.array([0, 1, 1]),
            np.array([1.0, -0.5, 0.25]),
        )
        results[name] = (
            corners,
            da,
            db,
            vals,
            kernels.sum_values(vals),
            kernels.max_pair_diff(vals, vals * 0.5, -vals),
        )
    nb, np_ = results["numba"], results["numpy"]
    assert np.array_equal(nb[0], np_[0])
    assert np.array_equal(nb[1], np_[1]) and np.array_equal(nb[2], np_[2])
    assert np.array_equal(nb[3], np_[3])  # poly values bitwise equal
    assert abs(nb[4] - np_[4]) <= 1e-12 * max(1.0, abs(np_[4]))
    assert nb[5] == np_[5]


@pytest.mark.skipif(not HAS_NUMBA, reason="numba unavailable")
def test_bfs_backends_agree(force_backend):
    from gasket_solenoid.distance import GasketGraph

    g = GasketGraph(0, 5)
    force_backend("numba")
    h1 = kernels.bfs_hops(g.indptr, g.indices, 3)
    force_backend("numpy")
    h2 = kernels.bfs_hops(g.indptr, g.indices, 3)
    assert np.array_equal(h1, h2)
    assert h1[3] == 0 and h1.min() == 0 and (h1 >= 0).all()


def test_subdivision_structure():
    c = kernels.subdivide_corners(2, 4)
    assert c.shape == (9, 2)
    # child 0 keeps the parent's corner, so the previous depth prefixes the next
    c1 = kernels.subdivide_corners(1, 4)
    assert np.array_equal(c[: c1.shape[0]], c1)
    assert np.array_equal(kernels.subdivide_corners(1, 2), np.array([[0, 0], [1, 0], [0, 1]]))
    with pytest.raises(ValueError):
        kernels.subdivide_corners(3, 4)


def test_descent_matches_object_level():
    from gasket_solenoid.dyadic import DyadicScalar, TrianglePoint
    from gasket_solenoid.groupoid import descend_point

    rng = np.random.default_rng(22)
    unit = 1 << 4
    corners = kernels.subdivide_corners(6, 4 << 4)  # fine cells of K_2
    pick = rng.choice(corners.shape[0], size=60, replace=False)
    a = corners[pick, 0].copy()
    b = corners[pick, 1].copy()
    da, db = kernels.descend_scaled(a, b, 2, 0, unit)
    for i in range(pick.size):
        p = TrianglePoint(DyadicScalar(int(a[i]), -4), DyadicScalar(int(b[i]), -4))
        q = descend_point(p, 0)
        assert q.alpha.as_pair(-4) == da[i] and q.beta.as_pair(-4) == db[i]


def test_sum_and_maxdiff_basics():
    vals = np.array([1.0, -2.0, 3.5])
    assert kernels.sum_values(vals) == 2.5
    assert kernels.max_pair_diff(np.array([0.0]), np.array([2.0]), np.array([3.0])) == 3.0
    assert kernels.max_pair_diff(np.zeros(0), np.zeros(0), np.zeros(0)) == 0.0


def test_determinism_repeated_calls():
    a, b = _sample_inputs()
    v1 = kernels.eval_poly_scaled(a, b, 1 << 7, np.array([2]), np.array([1]), np.array([0.375]))
    v2 = kernels.eval_poly_scaled(a, b, 1 << 7, np.array([2]), np.array([1]), np.array([0.375]))
    assert np.array_equal(v1, v2)
    assert kernels.sum_values(v1) == kernels.sum_values(v2)
