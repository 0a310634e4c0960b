import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layermixed import (InvalidParameterError, Layout, ProblemSpec, UnsupportedOperationError,
                        eval_exact, make_polynomial_problem, make_corner_layer_problem)


def test_corner_layer_delta_and_bounds():
    p = make_corner_layer_problem(1e-4)
    assert p.delta == pytest.approx(0.1425375, abs=1e-6)  # quoted value is off in the 7th digit
    assert p.delta == pytest.approx(1 / (1 + math.exp(0.5)) ** 2, rel=1e-15)
    assert p.c0 == 1.0 and p.c_inf == pytest.approx(1 + math.exp(0.5))
    assert p.layout is Layout.LEFT_ONLY
    g = np.linspace(0, 1, 101)
    X, Y = np.meshgrid(g, g)
    c = p.c(X, Y)
    assert c.min() >= p.c0 and c.max() <= p.c_inf * (1 + 1e-15)


@pytest.mark.parametrize("eps", [1e-8, 1e-4, 1e-2, 1.0])
def test_corner_layer_boundary_zero(eps):
    p = make_corner_layer_problem(eps)
    s = np.linspace(0, 1, 33)
    for x, y in [(0 * s, s), (1 + 0 * s, s), (s, 0 * s), (s, 1 + 0 * s)]:
        assert np.abs(p.exact.u(x, y)).max() <= 1e-15
    u, _, _ = eval_exact(p, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert np.all(u == 0)


def test_corner_layer_flux_matches_central_differences(rng):
    eps = 1e-4
    p = make_corner_layer_problem(eps)
    pts = 0.2 + 0.7 * rng.random((20, 2))
    h = 1e-7
    x, y = pts[:, 0], pts[:, 1]
    ux = (p.exact.u(x + h, y) - p.exact.u(x - h, y)) / (2 * h)
    uy = (p.exact.u(x, y + h) - p.exact.u(x, y - h)) / (2 * h)
    q1, q2 = p.exact.flux(x, y)
    np.testing.assert_allclose(q1, -eps * ux, rtol=1e-6)
    np.testing.assert_allclose(q2, -eps * uy, rtol=1e-6)


def test_corner_layer_flux_fd_in_layer():
    # inside the layer, with a step small against eps
    eps = 1e-2
    p = make_corner_layer_problem(eps)
    x, y = np.array([0.5 * eps, 0.3]), np.array([0.4, 2 * eps])
    h = 1e-8
    ux = (p.exact.u(x + h, y) - p.exact.u(x - h, y)) / (2 * h)
    np.testing.assert_allclose(p.exact.flux(x, y)[0], -eps * ux, rtol=1e-5)


def test_corner_layer_rhs_against_second_differences(rng):
    eps = 0.05
    p = make_corner_layer_problem(eps)
    x, y = 0.1 + 0.8 * rng.random(10), 0.1 + 0.8 * rng.random(10)
    h = 1e-4
    u = p.exact.u
    lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h**2
    np.testing.assert_allclose(p.f(x, y), -eps**2 * lap + p.c(x, y) * u(x, y), rtol=1e-5, atol=1e-9)


def test_layer_norm_closed_form():
    from scipy.integrate import quad
    eps = 0.01
    val = quad(lambda x: math.exp(-2 * x / eps), 0, 1, points=[eps, 10 * eps])[0]
    assert math.sqrt(val) == pytest.approx(math.sqrt(eps / 2 * (1 - math.exp(-2 / eps))), rel=1e-10)
    assert math.sqrt(val) == pytest.approx(0.0707107, abs=1e-7)


@pytest.mark.parametrize("constant_c", [False, True])
def test_defining_identity(constant_c, rng):
    p = make_corner_layer_problem(1e-3, constant_c=constant_c)
    x, y = rng.random(100), rng.random(100)
    u, _, div = eval_exact(p, x, y)
    np.testing.assert_allclose(p.c(x, y) * u + p.eps * div - p.f(x, y), 0, atol=1e-12)


def test_constant_c_variant():
    p = make_corner_layer_problem(1e-3, constant_c=True)
    assert p.c_inf == 1.0 and p.delta == 1.0
    assert np.all(p.c(np.array([0.3]), np.array([0.9])) == 1.0)


@pytest.mark.parametrize("eps", [0.0, 2.0, 1e-9])
def test_corner_layer_eps_range(eps):
    with pytest.raises(InvalidParameterError):
        make_corner_layer_problem(eps)


def test_polynomial_problem_values():
    eps = 0.1
    p = make_polynomial_problem(eps, 2, "rt")
    assert p.exact.u(0.5, 0.5) == pytest.approx(0.0625)
    assert p.f(0.5, 0.5) == pytest.approx(0.0625 + eps**2)
    x, y = np.array([0.2, 0.7]), np.array([0.9, 0.4])
    _, _, div = eval_exact(p, x, y)
    np.testing.assert_allclose(div, 2 * eps * (y * (1 - y) + x * (1 - x)), rtol=1e-13)


@pytest.mark.parametrize("family, k", [("rt", 1), ("bdm", 2)])
def test_polynomial_problem_needs_degree(family, k):
    with pytest.raises(InvalidParameterError, match="k >= "):
        make_polynomial_problem(1.0, k, family)


def test_eval_exact_needs_exact_fields():
    p = make_corner_layer_problem(0.1)
    bare = ProblemSpec("bare", 0.1, p.c, p.c0, p.c_inf, p.delta, p.f)
    with pytest.raises(UnsupportedOperationError):
        eval_exact(bare, 0.5, 0.5)


def test_delta_bound_enforced():
    p = make_corner_layer_problem(0.1)
    with pytest.raises(InvalidParameterError):
        ProblemSpec("x", 0.1, p.c, p.c0, p.c_inf, 0.5, p.f)


@settings(max_examples=50, deadline=None)
@given(log_eps=st.floats(-8, 0), x=st.floats(0, 1), y=st.floats(0, 1))
def test_identity_holds_for_all_eps(log_eps, x, y):
    p = make_corner_layer_problem(10.0**log_eps)
    u, _, div = eval_exact(p, x, y)
    f = p.f(x, y)
    assert abs(p.c(x, y) * u + p.eps * div - f) <= 1e-12 * max(1.0, abs(f))
