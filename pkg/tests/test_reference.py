import numpy as np
import pytest

from layermixed import (ConstructionError, InvalidParameterError, flux_reference_basis, gauss_rule,
                        piola_map, scalar_reference_basis)
from layermixed.reference import EDGE_NORMALS, _dof_functionals, legendre01

FLUX_CASES = [("rt", k) for k in range(0, 4)] + [("bdm", k) for k in range(1, 4)]


def test_gauss_rule_small():
    r1 = gauss_rule(1)
    np.testing.assert_allclose(r1.points, [0.5])
    np.testing.assert_allclose(r1.weights, [1.0])
    r2 = gauss_rule(2)
    np.testing.assert_allclose(r2.points, [0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r2.points, [0.211324865, 0.788675135], atol=1e-9)
    np.testing.assert_allclose(r2.weights, [0.5, 0.5])
    assert r2.weights @ r2.points**3 == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("q", [1, 2, 5, 9, 17, 30])
def test_gauss_rule_exactness(q):
    rule = gauss_rule(q)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    for d in range(2 * q):
        assert rule.weights @ rule.points**d == pytest.approx(1 / (d + 1), abs=1e-13)


def test_gauss_rule_q5_x9():
    rule = gauss_rule(5)
    assert abs(rule.weights @ rule.points**9 - 0.1) <= 1e-14


@pytest.mark.parametrize("q", [0, 31])
def test_gauss_rule_range(q):
    with pytest.raises(InvalidParameterError):
        gauss_rule(q)


def test_legendre01_orthonormal():
    rule = gauss_rule(10)
    P = legendre01(6, rule.points)
    np.testing.assert_allclose((P * rule.weights) @ P.T, np.eye(7), atol=1e-13)
    # derivative against a central difference
    s = np.linspace(0.1, 0.9, 7)
    h = 1e-6
    fd = (legendre01(6, s + h) - legendre01(6, s - h)) / (2 * h)
    np.testing.assert_allclose(legendre01(6, s, derivative=True), fd, atol=1e-5)


@pytest.mark.parametrize("k", range(0, 7))
def test_scalar_basis_dimension_and_partition_of_unity(k, rng):
    el = scalar_reference_basis(k)
    assert el.dim == (k + 1) ** 2
    pts = rng.random((25, 2))
    np.testing.assert_allclose(el.values(pts).sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(el.values(el.nodes), np.eye(el.dim), atol=1e-12)


def test_scalar_basis_reproduces_in_space_monomial(rng):
    el = scalar_reference_basis(3)
    coeffs = el.interpolate(lambda x, y: x**2 * y**3)
    pts = rng.random((30, 2))
    np.testing.assert_allclose(coeffs @ el.values(pts), pts[:, 0] ** 2 * pts[:, 1] ** 3, atol=1e-13)


@pytest.mark.parametrize("family, k", FLUX_CASES)
def test_flux_dimensions(family, k):
    el = flux_reference_basis(family, k)
    if family == "rt":
        assert el.dim == 2 * (k + 1) * (k + 2)
        assert el.n_interior == 2 * k * (k + 1)
    else:
        assert el.dim == (k + 1) * (k + 2) + 2
        assert el.n_interior == k * (k - 1)
    assert el.n_edge == k + 1


def test_flux_named_dimensions():
    assert flux_reference_basis("rt", 1).dim == 12
    assert flux_reference_basis("rt", 1).n_interior == 4
    assert flux_reference_basis("bdm", 1).dim == 8
    assert flux_reference_basis("bdm", 1).n_interior == 0
    assert flux_reference_basis("rt", 0).dim == 4


@pytest.mark.parametrize("family, k", FLUX_CASES + [("rt", 6), ("bdm", 6)])
def test_unisolvence(family, k):
    el = flux_reference_basis(family, k)
    assert el.gram_cond < 1e9
    funcs = el.functionals()
    np.testing.assert_allclose(funcs.apply(el.values(funcs.points)), np.eye(el.dim), atol=1e-10)


def test_bdm_degree_zero_rejected():
    with pytest.raises(InvalidParameterError):
        flux_reference_basis("bdm", 0)


def test_rt0_normal_components():
    el = flux_reference_basis("rt", 0)
    s = np.linspace(0, 1, 7)
    edges = [np.column_stack(p) for p in ((s, 0 * s), (1 + 0 * s, s), (s, 1 + 0 * s), (0 * s, s))]
    for e, pts in enumerate(edges):
        vals = el.values(pts)  # (4, 2, n)
        normal = np.einsum("bcn,c->bn", vals, EDGE_NORMALS[e])
        expected = np.zeros((4, len(s)))
        expected[e] = 1.0
        np.testing.assert_allclose(normal, expected, atol=1e-14)


def _in_space_projection_residual(values, pts, w, basis_vals):
    """Least-squares residual of values against a basis, both sampled at a Gauss rule."""
    G = (basis_vals * w) @ basis_vals.T
    coef = np.linalg.solve(G, (basis_vals * w) @ values.T)
    return np.abs(values - coef.T @ basis_vals).max()


@pytest.mark.parametrize("family, k", FLUX_CASES)
def test_divergence_closure(family, k, rng):
    el = flux_reference_basis(family, k)
    pts, w = gauss_rule(k + 3).tensor()
    div = rng.standard_normal((50, el.dim)) @ el.divergence(pts)
    px, py = legendre01(k, pts[:, 0]), legendre01(k, pts[:, 1])
    if family == "rt":
        basis = np.array([px[a] * py[b] for a in range(k + 1) for b in range(k + 1)])
    else:
        basis = np.array([px[a] * py[b] for a in range(k) for b in range(k - a)])
    assert _in_space_projection_residual(div, pts, w, basis) <= 1e-12 * max(1, np.abs(div).max())


@pytest.mark.parametrize("family, k", FLUX_CASES)
def test_edge_moment_locality(family, k):
    el = flux_reference_basis(family, k)
    funcs = el.functionals(k + 4)
    moments = funcs.apply(el.values(funcs.points))[:, :4 * el.n_edge]
    for e in range(4):
        own = el.edge_slice(e)
        others = np.ones(4 * el.n_edge, dtype=bool)
        others[own] = False
        assert np.abs(moments[own][:, others]).max() <= 1e-12


def test_piola_examples():
    v = np.array([[1.0], [0.0]])
    out, _ = piola_map(1.0, 1.0, values=v)
    np.testing.assert_array_equal(out, v)
    out, _ = piola_map(2.0, 3.0, values=v)
    np.testing.assert_allclose(out, [[1 / 3], [0.0]])
    _, d = piola_map(0.1, 0.1, divergence=np.array([1.0]))
    np.testing.assert_allclose(d, [100.0])
    with pytest.raises(InvalidParameterError):
        piola_map(0.0, 1.0, values=v)


@pytest.mark.parametrize("family, k", [("rt", 1), ("bdm", 2), ("rt", 3)])
def test_piola_preserves_edge_moments(family, k, rng):
    """Physical normal moments over an hx-by-hy cell equal the reference moments."""
    el = flux_reference_basis(family, k)
    hx, hy = 0.013, 0.7
    coef = rng.standard_normal(el.dim)
    rule = gauss_rule(k + 3)
    s, w = rule.points, rule.weights
    edges = [((s, 0 * s), hx), ((1 + 0 * s, s), hy), ((s, 1 + 0 * s), hx), ((0 * s, s), hy)]
    P = legendre01(k, s)
    for e, (pts, length) in enumerate(edges):
        pts = np.column_stack(pts)
        ref = np.einsum("b,bcn->cn", coef, el.values(pts))
        phys, _ = piola_map(hx, hy, values=ref)
        ref_mom = P @ (w * (EDGE_NORMALS[e] @ ref))
        phys_mom = P @ (w * length * (EDGE_NORMALS[e] @ phys))
        np.testing.assert_allclose(phys_mom, ref_mom, rtol=1e-12, atol=1e-13)


def test_dof_functionals_cached_and_readonly():
    a = _dof_functionals(flux_reference_basis("rt", 1).family, 1, 3)
    assert a is _dof_functionals(flux_reference_basis("rt", 1).family, 1, 3)
    assert not a.weights.flags.writeable


def test_construction_error_is_runtime_error():
    assert issubclass(ConstructionError, RuntimeError)
