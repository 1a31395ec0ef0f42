import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexlab.softmax import (grad_closeness, smax, smax_grad, smax_hessian,
                               smax_lipschitz_bound, smax_prefix,
                               smax_prefix_grad)

finite_vec = st.lists(st.floats(-30, 30), min_size=1, max_size=20).map(np.array)


def test_value_examples():
    assert smax(1.0, [0.0, 0.0]) == pytest.approx(math.log(2), abs=1e-12)
    assert smax(0.5, [1.0, 0.0]) == pytest.approx(0.5 * math.log(math.e**2 + 1),
                                                  abs=1e-12)
    # tiny temperature: dominant-term limit, no overflow
    assert smax(1e-5, [1.0, 0.0, -1.0]) == pytest.approx(1.0, abs=1e-12)


def test_value_is_at_least_max():
    z = np.array([0.3, -0.2, 0.9])
    assert smax(0.1, z) >= z.max()
    assert smax(0.1, z) <= z.max() + 0.1 * math.log(3) + 1e-15


def test_empty_rejected():
    with pytest.raises(ValueError):
        smax(1.0, [])


def test_bad_rho_rejected():
    with pytest.raises(ValueError):
        smax(0.0, [1.0])
    with pytest.raises(ValueError):
        smax(-1.0, [1.0])


def test_prefix_equals_full_bitwise():
    z = np.array([0.4, -1.2, 3.3, 0.0])
    assert smax_prefix(0.3, 4, z) == smax(0.3, z)


def test_prefix_bounds_checked():
    with pytest.raises(ValueError):
        smax_prefix(1.0, 0, [1.0])
    with pytest.raises(ValueError):
        smax_prefix(1.0, 3, [1.0, 2.0])


def test_grad_examples():
    np.testing.assert_allclose(smax_grad(2.0, [3.0, 3.0, 3.0]), np.full(3, 1 / 3),
                               atol=1e-15)
    g = smax_grad(1.0, [1.0, 0.0])
    np.testing.assert_allclose(g, [math.e / (math.e + 1), 1 / (math.e + 1)],
                               atol=1e-12)


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(50):
        dim = int(rng.integers(2, 12))
        rho = float(10.0 ** rng.uniform(-3, 0))
        z = rng.standard_normal(dim)
        g = smax_grad(rho, z)
        h = rho / 200
        for i in range(dim):
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            fd = (smax(rho, zp) - smax(rho, zm)) / (2 * h)
            assert abs(fd - g[i]) < 1e-6


def test_hessian_example_and_structure():
    H = smax_hessian(1.0, [0.0, 0.0])
    np.testing.assert_allclose(H, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)
    rng = np.random.default_rng(1)
    for _ in range(25):
        z = rng.standard_normal(int(rng.integers(2, 40)))
        H = smax_hessian(0.3, z)
        np.testing.assert_allclose(H.sum(axis=1), 0.0, atol=1e-12)
        assert np.linalg.eigvalsh(H)[0] >= -1e-12
        y = rng.standard_normal(z.size)
        assert y @ H @ y >= -1e-12


def test_hessian_size_guard():
    with pytest.raises(ValueError, match="guard"):
        smax_hessian(1.0, np.zeros(10_001))


def test_grad_closeness_suppressed_suffix():
    z = np.array([0.0, 0.3, -800.0, -900.0])
    res = grad_closeness(1.0, 2, z)
    assert res.applicable
    assert res.delta == pytest.approx(0.0, abs=1e-12)
    assert res.actual_gap == pytest.approx(0.0, abs=1e-12)


def test_grad_closeness_worked_example():
    res = grad_closeness(1.0, 1, np.array([0.0, -3.0]))
    assert res.applicable
    assert res.delta == pytest.approx(math.log(1 + math.exp(-3)), abs=1e-12)
    w2 = math.exp(-3) / (1 + math.exp(-3))
    assert res.actual_gap == pytest.approx(w2 * math.sqrt(2), abs=1e-12)
    assert res.actual_gap <= res.bound


def test_grad_closeness_not_applicable_state():
    res = grad_closeness(0.1, 1, np.array([0.0, 5.0]))
    assert not res.applicable
    assert res.delta >= 1.0


def test_grad_closeness_random_sweep():
    rng = np.random.default_rng(2)
    applicable = 0
    for _ in range(3000):
        dim = int(rng.integers(2, 16))
        m = int(rng.integers(1, dim))
        rho = float(10.0 ** rng.uniform(-2, 0))
        z = np.sort(rng.standard_normal(dim) * rng.uniform(0.05, 2.0))[::-1]
        res = grad_closeness(rho, m, z)  # raises internally on violation
        if res.applicable:
            applicable += 1
            assert res.actual_gap <= res.bound + 1e-12
    assert applicable > 500


def test_lipschitz_bound_values():
    assert smax_lipschitz_bound(1, 1.0) == pytest.approx((2 / math.log(3)) ** 2)
    assert smax_lipschitz_bound(1, 0.5) == pytest.approx(2 * (2 / math.log(3)) ** 2)
    assert smax_lipschitz_bound(2, 1.0) == pytest.approx((3 / math.log(4)) ** 3 * 2)
    with pytest.raises(ValueError):
        smax_lipschitz_bound(0, 1.0)


@settings(max_examples=200, deadline=None)
@given(finite_vec, st.floats(0.01, 10), st.floats(-50, 50))
def test_shift_identity(z, rho, c):
    assert smax(rho, z + c) == pytest.approx(smax(rho, z) + c, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(finite_vec, st.floats(0.01, 10))
def test_grad_is_simplex_weight(z, rho):
    w = smax_grad(rho, z)
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12), st.floats(0.05, 5), st.data())
def test_one_lipschitz_and_convex(dim, rho, data):
    z = np.array(data.draw(st.lists(st.floats(-20, 20), min_size=dim, max_size=dim)))
    w = np.array(data.draw(st.lists(st.floats(-20, 20), min_size=dim, max_size=dim)))
    assert abs(smax(rho, z) - smax(rho, w)) <= np.linalg.norm(z - w) + 1e-9
    mid = smax(rho, (z + w) / 2)
    assert mid <= (smax(rho, z) + smax(rho, w)) / 2 + 1e-12


def test_prefix_grad_zero_padding():
    z = np.array([1.0, 0.5, -0.5])
    g = smax_prefix_grad(0.7, 2, z)
    assert g[2] == 0.0
    assert g[:2].sum() == pytest.approx(1.0, abs=1e-12)
