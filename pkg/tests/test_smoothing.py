import math

import numpy as np
import pytest

from convexlab.frames import haar_frame
from convexlab.nemirovski import stagger_offsets
from convexlab.rng import substream
from convexlab.smoothing import (SmoothingConfig, ball_point, ball_points,
                                 compound_radii, nested_smooth_grad,
                                 nested_smooth_value, perturbation_blocks,
                                 smoothing_property_suite)


def nemirovski_field(frame, gamma):
    off = stagger_offsets(frame.k, gamma)

    def f(Y):
        return (np.atleast_2d(Y) @ frame.vectors.T + off).max(axis=1)

    def grad(Y):
        z = np.atleast_2d(Y) @ frame.vectors.T + off
        return frame.vectors[np.argmax(z, axis=1)]

    return f, grad


def test_config_invariants():
    cfg = SmoothingConfig(beta=0.4, p=3, samples=10)
    assert cfg.radius(1) == 0.2
    assert cfg.radius(3) == 0.05
    np.testing.assert_allclose(compound_radii(cfg), [0.05, 0.1, 0.2])
    with pytest.raises(ValueError):
        SmoothingConfig(beta=0.0, p=1, samples=10)
    with pytest.raises(ValueError):
        SmoothingConfig(beta=1.0, p=0, samples=10)
    with pytest.raises(ValueError):
        SmoothingConfig(beta=1.0, p=1, samples=0)
    with pytest.raises(ValueError):
        cfg.radius(4)


def test_ball_point_zero_radius():
    rng = substream(0, "bp")
    c = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(ball_point(c, 0.0, rng), c)


def test_ball_radius_law_dimension_two():
    # area law: Pr(||y - x|| <= eta/sqrt(2)) = 1/2
    rng = substream(1, "bp2")
    Y = ball_points(np.zeros(2), 1.0, 100_000, rng)
    frac = float((np.linalg.norm(Y, axis=1) <= 1 / math.sqrt(2)).mean())
    assert abs(frac - 0.5) < 0.01


def test_ball_radius_concentrates_in_high_dimension():
    rng = substream(2, "bphd")
    Y = ball_points(np.zeros(10_000), 1.0, 200, rng)
    assert float(np.linalg.norm(Y, axis=1).mean()) >= 0.999


def test_ball_samples_stay_inside():
    rng = substream(3, "bpin")
    Y = ball_points(np.ones(5), 0.3, 5000, rng)
    assert np.linalg.norm(Y - 1.0, axis=1).max() <= 0.3 + 1e-12


def test_constant_field_exact():
    cfg = SmoothingConfig(beta=0.1, p=2, samples=64, stream=4)
    est = nested_smooth_value(lambda y: np.full(len(y), 3.25), cfg, np.zeros(6))
    assert est.mean == 3.25
    assert est.stderr == 0.0


def test_linear_field_antithetic_exact():
    cfg = SmoothingConfig(beta=0.1, p=2, samples=128, stream=5)
    a = np.arange(1.0, 7.0)
    x = np.full(6, 0.3)
    est = nested_smooth_value(lambda y: y @ a, cfg, x)
    assert est.mean == pytest.approx(float(x @ a), abs=1e-12)
    assert est.stderr <= 1e-12


def test_linear_gradient_exact_per_sample():
    cfg = SmoothingConfig(beta=0.1, p=1, samples=32, stream=6)
    a = np.array([2.0, -1.0, 0.5])
    est = nested_smooth_grad(lambda y: np.tile(a, (len(y), 1)), cfg, np.zeros(3))
    np.testing.assert_array_equal(est.mean, a)
    assert est.stderr == 0.0


def test_closed_form_interval_average():
    # one dimension, radius 1/2: E u^2 = 1/12
    cfg = SmoothingConfig(beta=1.0, p=1, samples=100_000, stream=7)
    est = nested_smooth_value(lambda y: (y**2).sum(axis=1), cfg, np.zeros(1))
    assert abs(est.mean - 1 / 12) <= 4 * est.stderr
    assert est.stderr < 2e-3


def test_common_random_numbers_bitwise():
    frame = haar_frame(24, 3, seed=8)
    f, _ = nemirovski_field(frame, 0.05)
    cfg = SmoothingConfig(beta=0.05, p=2, samples=512, stream=9)
    x = np.full(24, 0.1)
    a = nested_smooth_value(f, cfg, x)
    b = nested_smooth_value(f, cfg, x)
    assert (a.mean, a.stderr, a.samples_used) == (b.mean, b.stderr, b.samples_used)


def test_perturbations_do_not_depend_on_center():
    # same stream at two centers: linear field difference is exact
    cfg = SmoothingConfig(beta=0.05, p=2, samples=128, stream=10)
    a = np.array([1.0, 2.0, 3.0, 4.0])
    f = lambda y: y @ a
    x = np.zeros(4)
    y = np.array([0.1, 0.0, -0.2, 0.05])
    ex = nested_smooth_value(f, cfg, x)
    ey = nested_smooth_value(f, cfg, y)
    assert ex.mean - ey.mean == pytest.approx(float((x - y) @ a), abs=1e-12)


def test_blocking_is_deterministic_function_of_config():
    cfg = SmoothingConfig(beta=0.05, p=1, samples=700, stream=11, antithetic=False)
    stacked = np.vstack(list(perturbation_blocks(cfg, 3)))
    again = np.vstack(list(perturbation_blocks(cfg, 3)))
    np.testing.assert_array_equal(stacked, again)
    assert stacked.shape == (700, 3)


def test_nemirovski_approximation_bound():
    # |S[f](x) - f(x)| <= beta * G with G = 1
    frame = haar_frame(48, 4, seed=12)
    f, _ = nemirovski_field(frame, 0.05)
    cfg = SmoothingConfig(beta=0.02, p=2, samples=2048, stream=13)
    rng = substream(14, "pts")
    for x in ball_points(np.zeros(48), 0.9, 10, rng):
        est = nested_smooth_value(f, cfg, x)
        fx = float(f(x[None, :])[0])
        assert abs(est.mean - fx) <= 0.02 + 3 * est.stderr


def test_grad_estimate_matches_value_finite_difference():
    frame = haar_frame(32, 3, seed=15)
    f, grad = nemirovski_field(frame, 0.05)
    cfg = SmoothingConfig(beta=0.05, p=2, samples=4096, stream=16)
    rng = substream(17, "fd")
    x = ball_points(np.zeros(32), 0.5, 1, rng)[0]
    d = rng.standard_normal(32)
    d /= np.linalg.norm(d)
    eps = 1e-3
    vp = nested_smooth_value(f, cfg, x + eps * d)
    vm = nested_smooth_value(f, cfg, x - eps * d)
    g = nested_smooth_grad(grad, cfg, x)
    fd = (vp.mean - vm.mean) / (2 * eps)
    tol = max(1e-4, 5 * (vp.stderr + vm.stderr) / (2 * eps) + 5 * g.stderr)
    assert abs(fd - float(g.mean @ d)) <= tol


def test_convex_gradient_monotonicity():
    frame = haar_frame(32, 3, seed=18)
    _, grad = nemirovski_field(frame, 0.05)
    cfg = SmoothingConfig(beta=0.05, p=1, samples=2048, stream=19)
    rng = substream(20, "mono")
    for _ in range(10):
        x = ball_points(np.zeros(32), 0.8, 1, rng)[0]
        y = ball_points(np.zeros(32), 0.8, 1, rng)[0]
        gx = nested_smooth_grad(grad, cfg, x)
        gy = nested_smooth_grad(grad, cfg, y)
        inner = float((gx.mean - gy.mean) @ (x - y))
        assert inner >= -5 * (gx.stderr + gy.stderr) * float(np.linalg.norm(x - y))


def test_variance_scaling_with_samples():
    cfg_a = SmoothingConfig(beta=0.5, p=1, samples=20_000, stream=21,
                            antithetic=False)
    cfg_b = SmoothingConfig(beta=0.5, p=1, samples=40_000, stream=21,
                            antithetic=False)
    f = lambda y: np.sqrt((y**2).sum(axis=1) + 0.01)
    x = np.full(8, 0.2)
    ra = nested_smooth_value(f, cfg_a, x)
    rb = nested_smooth_value(f, cfg_b, x)
    assert ra.stderr / rb.stderr == pytest.approx(math.sqrt(2), rel=0.1)


def test_property_suite_on_convex_field():
    frame = haar_frame(24, 3, seed=22)
    f, grad = nemirovski_field(frame, 0.05)
    cfg = SmoothingConfig(beta=0.05, p=2, samples=1024, stream=23)
    rng = substream(24, "suitepts")
    pts = ball_points(np.zeros(24), 0.7, 5, rng)
    checks = smoothing_property_suite(f, 1.0, cfg, pts, convex=True, grad_f=grad,
                                      seed=25)
    failed = [c for c in checks if not c.passed]
    assert not failed, failed


def test_antithetic_pairs_present():
    cfg = SmoothingConfig(beta=0.1, p=1, samples=8, stream=26)
    (block,) = list(perturbation_blocks(cfg, 4))
    np.testing.assert_array_equal(block[:4], -block[4:])
