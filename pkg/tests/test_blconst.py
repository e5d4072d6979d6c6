import numpy as np
import pytest

from blsos.blconst import BLConstError, bl_constant

LW = [[[0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 0]]]


def test_holder_constant_one():
    r = bl_constant([[[1]], [[1]]], [0.5, 0.5])
    assert r.converged and abs(r.C - 1) < 1e-6 and r.iterations < 1000


def test_lw_constant_one():
    r = bl_constant(LW, [0.5] * 3)
    assert r.converged and abs(r.C - 1) < 1e-6


def test_lw_quarter_divergent():
    r = bl_constant(LW, [0.25] * 3)
    assert r.status == "DIVERGENT" and r.C is None and r.iterations < 1000
    assert r.to_json()["converged"] is False


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.77])
def test_two_identity_maps_conjugate(p):
    r = bl_constant([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [p, 1 - p])
    assert r.converged and abs(r.C - 1) < 1e-6


def test_objective_non_decreasing():
    rng = np.random.default_rng(0)
    for _ in range(5):
        maps = [rng.normal(size=(1, 2)) for _ in range(3)]
        r = bl_constant(maps, [2 / 3] * 3, init=[[[rng.uniform(0.5, 3)]] for _ in range(3)])
        if r.converged:
            h = r.history
            assert all(b >= a - 1e-12 * max(1, abs(a)) for a, b in zip(h, h[1:]))


def test_scale_invariance_of_init():
    eps = 1e-12
    base = bl_constant(LW, [0.5] * 3, epsilon=eps)
    scaled = bl_constant(LW, [0.5] * 3, epsilon=eps, init=[10 * np.eye(2)] * 3)
    assert abs(base.C - scaled.C) < 1e-9
    maps = [[[1, 0]], [[0, 1]], [[1, 1]]]
    a = bl_constant(maps, [2 / 3] * 3, epsilon=eps)
    b = bl_constant(maps, [2 / 3] * 3, epsilon=eps, init=[[[10.0]]] * 3)
    assert a.converged and b.converged and abs(a.C - b.C) < 1e-6


def test_errors():
    with pytest.raises(BLConstError):
        bl_constant([[[1, 0]], [[1]]], [0.5, 0.5])
    with pytest.raises(BLConstError):
        bl_constant([[[1, 0], [2, 0]]], [1])
    with pytest.raises(BLConstError):
        bl_constant([[[1]]], [0])
    with pytest.raises(BLConstError):
        bl_constant(LW, [0.5] * 3, init=[[[1, 2], [0, 1]]] * 3)
    with pytest.raises(BLConstError):
        bl_constant(LW, [0.5] * 3, init=[np.eye(3)] * 3)
    with pytest.raises(BLConstError):
        bl_constant([[[1]]], [0.5, 0.5])
