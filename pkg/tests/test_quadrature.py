import math

import numpy as np
import pytest

from lattice_embed.errors import AllPairsDegenerateError, BadResolutionError
from lattice_embed.geometry import ManifoldSpec
from lattice_embed.quadrature import (
    build_quadrature,
    curvature_double_integral,
    curvature_integral_gradient,
    sphere_measure,
)

TWO_PI_SQ = (2.0 * math.pi) ** 2

SPHERE = ManifoldSpec.sphere(1.0)
PLANE = ManifoldSpec.plane()
TORUS = ManifoldSpec.torus(2.0, 0.5)


def test_circle_rule_uniform_angles():
    rule = build_quadrature(2, 8)
    assert rule.nodes.shape == (8, 2)
    angles = np.arctan2(rule.nodes[:, 1], rule.nodes[:, 0]) % (2 * math.pi)
    assert np.allclose(sorted(angles), 2 * math.pi * np.arange(8) / 8, atol=1e-12)
    assert np.allclose(rule.weights, math.pi / 4)
    assert float(np.sum(rule.weights)) == pytest.approx(2 * math.pi, abs=1e-12)


def test_monte_carlo_rule_deterministic_and_unit():
    a = build_quadrature(3, 1000, seed=7)
    b = build_quadrature(3, 1000, seed=7)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.weights, b.weights)
    assert np.max(np.abs(np.linalg.norm(a.nodes, axis=1) - 1.0)) < 1e-12
    assert float(np.sum(a.weights)) == pytest.approx(4 * math.pi, abs=1e-9)
    c = build_quadrature(3, 1000, seed=8)
    assert not np.array_equal(a.nodes, c.nodes)


def test_bad_resolution_rejected():
    with pytest.raises(BadResolutionError):
        build_quadrature(2, 3)


def test_sphere_measures():
    assert sphere_measure(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_measure(3) == pytest.approx(4 * math.pi, rel=1e-15)


def test_integral_sphere_unit_radius():
    rule = build_quadrature(2, 64)
    value = curvature_double_integral(SPHERE, [1.2, 0.7], rule)
    assert abs(value - TWO_PI_SQ) <= 0.01 * TWO_PI_SQ


def test_integral_sphere_radius_two():
    rule = build_quadrature(2, 64)
    value = curvature_double_integral(ManifoldSpec.sphere(2.0), [1.2, 0.7], rule)
    assert abs(value - TWO_PI_SQ / 4) <= 0.01 * TWO_PI_SQ / 4


def test_integral_plane_zero():
    rule = build_quadrature(2, 64)
    assert abs(curvature_double_integral(PLANE, [0.3, -0.2], rule)) <= 1e-8


def test_integral_fd_pipeline_close_to_analytic():
    rule = build_quadrature(2, 64)
    u = [1.2, 0.7]
    fd = curvature_double_integral(SPHERE, u, rule, method="fd")
    assert abs(fd - TWO_PI_SQ) <= 1e-3 * TWO_PI_SQ
    fd_torus = curvature_double_integral(TORUS, [1.0, 2.0], rule, method="fd")
    analytic = curvature_double_integral(TORUS, [1.0, 2.0], rule)
    assert abs(fd_torus - analytic) <= 1e-3 * max(abs(analytic), 1.0)


def test_integral_convergence_monotone():
    errs = []
    for resolution in (16, 64, 256):
        rule = build_quadrature(2, resolution)
        value = curvature_double_integral(SPHERE, [1.2, 0.7], rule)
        errs.append(abs(value - TWO_PI_SQ))
    assert errs[0] >= errs[1] >= errs[2]


def test_integral_determinism():
    rule = build_quadrature(2, 64)
    a = curvature_double_integral(TORUS, [1.0, 2.0], rule, method="fd")
    b = curvature_double_integral(TORUS, [1.0, 2.0], rule, method="fd")
    assert a == b


def test_retained_weight_rescaling():
    # the rescaled pair-weight mass must equal the squared circle measure
    rule = build_quadrature(2, 16)
    cos = rule.nodes @ rule.nodes.T
    mask = (1.0 - cos * cos) > 1e-8
    pair_w = np.outer(rule.weights, rule.weights)[mask]
    rescaled_total = float(np.sum(pair_w)) * (2 * math.pi) ** 2 / float(np.sum(pair_w))
    assert rescaled_total == pytest.approx((2 * math.pi) ** 2, abs=1e-9)
    # and the integral of the unit-curvature field reproduces it exactly
    value = curvature_double_integral(SPHERE, [1.2, 0.7], rule)
    assert value == pytest.approx(TWO_PI_SQ, abs=1e-9)


def test_all_pairs_degenerate():
    rule = build_quadrature(2, 8)
    with pytest.raises(AllPairsDegenerateError):
        curvature_double_integral(SPHERE, [1.2, 0.7], rule, eps_parallel=1.5)


def test_dimension_mismatch_rejected():
    rule = build_quadrature(3, 16)
    with pytest.raises(ValueError):
        curvature_double_integral(SPHERE, [1.2, 0.7], rule)


def test_gradient_zero_on_sphere():
    rule = build_quadrature(2, 64)
    q = np.array([0.4, 0.5, 0.9])
    grad_analytic = curvature_integral_gradient(SPHERE, q, rule, 1e-3)
    assert np.max(np.abs(grad_analytic)) <= 1e-12
    grad_fd = curvature_integral_gradient(SPHERE, q, rule, 1e-3, method="fd")
    assert np.max(np.abs(grad_fd)) <= 2e-3


def test_gradient_zero_on_plane():
    rule = build_quadrature(2, 64)
    grad = curvature_integral_gradient(PLANE, np.array([0.2, 0.1, 0.05]), rule, 1e-3)
    assert np.max(np.abs(grad)) <= 1e-8


def test_gradient_torus_halving_consistency():
    rule = build_quadrature(2, 64)
    q = np.array([2.4, 0.1, 0.15])  # near the outer upper tube wall
    full = curvature_integral_gradient(TORUS, q, rule, 1e-3)
    half = curvature_integral_gradient(TORUS, q, rule, 5e-4)
    assert np.linalg.norm(full) > 0.1  # the field genuinely varies here
    rel = np.linalg.norm(full - half) / np.linalg.norm(half)
    assert rel <= 0.05
