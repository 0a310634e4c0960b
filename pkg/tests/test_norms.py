import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from layermixed.norms import cell_quadrature_groups

from layermixed import (FluxField, assemble, solve_direct, MixedSolution, ScalarField, build_flux_space, build_mesh_1d,
                        build_scalar_space, build_tensor_mesh, canonical_interpolate,
                        compute_errors, convergence_rates, make_polynomial_problem,
                        make_corner_layer_problem, triple_norms, weighted_l2_project)

from conftest import graded_mesh


def _zero_solution(mesh, family="rt", k=1):
    s, f = build_scalar_space(mesh, k), build_flux_space(mesh, family, k)
    return MixedSolution(ScalarField(s, np.zeros(s.ndofs)), FluxField(f, np.zeros(f.ndofs)), 0.0, {})


def test_triple_norm_examples():
    assert triple_norms(1, 0, 0, 1e-3, 0.2) == (1.0, 1.0)
    assert triple_norms(0, 1, 0, 0.25, 0.7) == pytest.approx((1.0, 2.0))
    t, b = triple_norms(0, 0, 2, 0.01, 0.5)
    assert t == pytest.approx(math.sqrt(0.5 * 1e-4 * 4))
    assert b == pytest.approx(math.sqrt(0.5 * 1e-2 * 4))


def test_bdm1_components_recombine():
    delta = 1 / (1 + math.exp(0.5)) ** 2
    eps = 1e-4
    eu, scaled_q, scaled_d = 1.315e-5, 1.485e-3, 4.965e-4
    # the published components are eps^{-1/2}|q - qh| and (delta eps)^{1/2}|div(q - qh)|
    _, bal = triple_norms(eu, scaled_q * math.sqrt(eps), scaled_d / math.sqrt(delta * eps), eps, delta)
    assert bal == pytest.approx(1.566e-3, rel=0.01)


@settings(max_examples=200, deadline=None)
@given(eu=st.floats(0, 10), eq=st.floats(0, 10), ed=st.floats(0, 1e3),
       log_eps=st.floats(-8, 0), delta=st.floats(0, 1))
def test_norm_ordering(eu, eq, ed, log_eps, delta):
    eps = 10.0**log_eps
    t, b = triple_norms(eu, eq, ed, eps, delta)
    assert t >= eu * (1 - 1e-15)
    assert b >= t * (1 - 1e-12)


def test_rate_examples():
    assert convergence_rates([2.304e-3, 5.679e-4])[1] == pytest.approx(2.02, abs=5e-3)
    assert convergence_rates([1.059e-3, 1.518e-4])[1] == pytest.approx(2.80, abs=5e-3)
    assert convergence_rates([3.0, 3.0]) == [None, 0.0]
    assert convergence_rates([1.0, 0.0, 1.0]) == [None, None, None]
    assert convergence_rates([1.0, float("nan")]) == [None, None]


def test_shishkin_adjusted_rate():
    Ns = [16, 32, 64]
    errs = [(math.log(n) / n) ** 2 for n in Ns]
    plain = convergence_rates(errs, Ns)
    adjusted = convergence_rates(errs, Ns, shishkin=True)
    assert adjusted[1:] == pytest.approx([2.0, 2.0])
    assert all(p < 2.0 for p in plain[1:])


def test_zero_solution_error_is_norm_of_u():
    eps = 0.01
    p = make_corner_layer_problem(eps)
    m = build_mesh_1d(16, eps, 2.5, "bakhvalov-s", "left-only")
    mesh = build_tensor_mesh(m, m)
    rep = compute_errors(_zero_solution(mesh), p)
    # independent oracle: adaptive quadrature on the unit square, split at the layers
    f = lambda y, x: p.exact.u(x, y) ** 2
    total = 0.0
    cuts = [0, 0.1, 1]
    for a, b in zip(cuts, cuts[1:]):
        for c, d in zip(cuts, cuts[1:]):
            total += dblquad(f, a, b, c, d, epsabs=1e-13, epsrel=1e-11)[0]
    assert rep.err_u == pytest.approx(math.sqrt(total), rel=1e-8)
    assert rep.tnorm >= rep.err_u


def test_polynomial_interpolant_has_no_error():
    eps = 1e-2
    p = make_polynomial_problem(eps, 2, "rt")
    mesh = graded_mesh(8, eps=eps)
    s, f = build_scalar_space(mesh, 2), build_flux_space(mesh, "rt", 2)
    u = weighted_l2_project(s, p.exact.u)
    q = canonical_interpolate(f, p.exact.flux)
    rep = compute_errors(MixedSolution(u, q, 0.0, {}), p)
    assert max(rep.err_u, rep.err_flux, rep.err_div, rep.tnorm_bal) <= 1e-9


@pytest.mark.parametrize("layout", ["left-only", "two-sided"])
def test_quadrature_groups_cover_cells_and_resolve_layer_tail(layout):
    eps, N = 1e-4, 64
    m = build_mesh_1d(N, eps, 2.5, "bakhvalov-s", layout)
    mesh = build_tensor_mesh(m, m)
    seen = np.zeros(mesh.n_cells, dtype=int)
    total_area, layer = 0.0, 0.0
    for cells, pts, wc in cell_quadrature_groups(mesh, 4):
        seen[cells] += 1
        px, _ = mesh.map_points(pts, cells)
        total_area += wc.sum()
        layer += np.sum(wc * np.exp(-2 * px / eps))
    assert np.all(seen == 1)
    assert total_area == pytest.approx(1.0, rel=1e-13)
    assert layer == pytest.approx(eps / 2 * (1 - math.exp(-2 / eps)), rel=1e-6)


def test_quadrature_guard():
    eps = 1e-4
    p = make_corner_layer_problem(eps)
    m = build_mesh_1d(64, eps, 2.5, "bakhvalov-s", "left-only")
    mesh = build_tensor_mesh(m, m)
    sol = solve_direct(assemble(build_scalar_space(mesh, 1), build_flux_space(mesh, "rt", 1), p))
    a = compute_errors(sol, p)
    b = compute_errors(sol, p, quad_order=a.meta["quad"] + 2)
    for x, y in ((a.err_u, b.err_u), (a.err_flux, b.err_flux), (a.err_div, b.err_div)):
        assert abs(x - y) <= 1e-3 * y


def test_report_as_dict():
    rep = compute_errors(_zero_solution(graded_mesh(8)), make_corner_layer_problem(0.1), meta={"N": 8})
    d = rep.as_dict()
    assert d["N"] == 8 and d["eps"] == 0.1 and "meta" not in d
