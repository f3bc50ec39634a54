import math

import numpy as np
import pytest

from lattice_embed.errors import ExpressionError
from lattice_embed.expressions import compile_chart, parse_expression


def test_evaluate_polynomial_and_trig():
    expr = parse_expression("2*u1^2 - u2/4 + sin(u1)*cos(u2) + pi", 2)
    env = {"u1": 0.7, "u2": -1.2}
    expected = 2 * 0.7**2 + 1.2 / 4 + math.sin(0.7) * math.cos(-1.2) + math.pi
    assert expr.evaluate(env) == pytest.approx(expected, rel=1e-15)


def test_evaluate_vectorized():
    expr = parse_expression("exp(u1) - u2", 2)
    u1 = np.array([0.0, 1.0, 2.0])
    u2 = np.array([1.0, 1.0, 1.0])
    out = expr.evaluate({"u1": u1, "u2": u2})
    assert np.allclose(out, np.exp(u1) - 1.0)


@pytest.mark.parametrize(
    "text",
    ["u1^3 - 2*u2", "sin(2*u1)*cos(u2)", "exp(-u1^2)", "u1*u2 + u2/(1 + u1^2)"],
)
def test_derivative_matches_finite_difference(text):
    expr = parse_expression(text, 2)
    d1 = expr.derivative("u1")
    d2 = expr.derivative("u2")
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(20):
        u1, u2 = rng.uniform(-1.5, 1.5, size=2)
        fd1 = (
            expr.evaluate({"u1": u1 + h, "u2": u2})
            - expr.evaluate({"u1": u1 - h, "u2": u2})
        ) / (2 * h)
        fd2 = (
            expr.evaluate({"u1": u1, "u2": u2 + h})
            - expr.evaluate({"u1": u1, "u2": u2 - h})
        ) / (2 * h)
        assert d1.evaluate({"u1": u1, "u2": u2}) == pytest.approx(fd1, abs=1e-8)
        assert d2.evaluate({"u1": u1, "u2": u2}) == pytest.approx(fd2, abs=1e-8)


def test_compile_chart_shapes_and_jacobian():
    chart, jacobian = compile_chart(["u1", "u2", "u1^2 - u2^2"], 2)
    pts = np.array([[0.5, -0.25], [1.0, 2.0]])
    out = chart(pts)
    assert out.shape == (2, 3)
    assert np.allclose(out[0], [0.5, -0.25, 0.25 - 0.0625])
    jac = jacobian(np.array([0.5, -0.25]))
    assert jac.shape == (3, 2)
    assert np.allclose(jac, [[1, 0], [0, 1], [1.0, 0.5]])


def test_constant_component_broadcasts():
    chart, _ = compile_chart(["u1", "u2", "0"], 2)
    out = chart(np.zeros((4, 2)))
    assert out.shape == (4, 3)
    assert np.all(out[:, 2] == 0.0)


@pytest.mark.parametrize(
    "bad",
    ["u3 + 1", "sin(u1", "u1 ^ u2", "1 +* 2", "foo(u1)", "u1 $ u2"],
)
def test_parse_errors(bad):
    with pytest.raises(ExpressionError):
        parse_expression(bad, 2)
