"""Reference-cell machinery on the unit square ``[0, 1]^2``.

Polynomials are represented by coefficient arrays in the tensor basis of
orthonormal shifted Legendre polynomials ``p_a(x) p_b(y)``. Vector-valued
H(div) bases are obtained by inverting the Gram matrix of the DOF
functionals on a spanning set of the local space.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import ConstructionError, InvalidParameterError

# edge order: bottom, right, top, left
EDGE_NORMALS = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
# sign relating the outward normal to the global normal (+x on vertical, +y on horizontal edges)
EDGE_GLOBAL_SIGN = np.array([-1.0, 1.0, 1.0, -1.0])


class FluxFamily(str, Enum):
    RT = "rt"
    BDM = "bdm"


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)

    def tensor(self):
        """Tensor-product rule on the unit square; x varies fastest."""
        X, Y = np.meshgrid(self.points, self.points)
        WX, WY = np.meshgrid(self.weights, self.weights)
        return np.column_stack([X.ravel(), Y.ravel()]), (WX * WY).ravel()


@lru_cache(maxsize=None)
def gauss_rule(q: int) -> QuadratureRule:
    """q-point Gauss-Legendre rule on [0, 1]."""
    if not 1 <= q <= 30:
        raise InvalidParameterError(f"quadrature size must lie in [1, 30], got {q}")
    t, w = npleg.leggauss(q)
    return QuadratureRule(_readonly((t + 1.0) / 2.0), _readonly(w / 2.0))


def legendre01(deg: int, s, derivative: bool = False) -> np.ndarray:
    """Orthonormal Legendre polynomials on [0, 1] (or their derivatives), shape (deg+1, n)."""
    t = 2.0 * np.asarray(s, dtype=float) - 1.0
    norms = np.sqrt(2.0 * np.arange(deg + 1) + 1.0)
    if not derivative:
        return (npleg.legvander(t, deg) * norms).T
    out = np.empty((deg + 1, t.size))
    for j in range(deg + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        out[j] = 2.0 * norms[j] * npleg.legval(t, npleg.legder(c))
    return out


@lru_cache(maxsize=None)
def _monomial_coeffs(n: int, deg: int) -> np.ndarray:
    """Coefficients of s**n in the orthonormal Legendre basis up to ``deg``."""
    rule = gauss_rule(n // 2 + deg // 2 + 2)
    return legendre01(deg, rule.points) @ (rule.weights * rule.points**n)


def eval_tensor(coef, points, dx: int = 0, dy: int = 0) -> np.ndarray:
    """Evaluate coefficient arrays ``coef[..., a, b]`` at points (n, 2)."""
    points = np.asarray(points, dtype=float)
    m = coef.shape[-1]
    px = legendre01(m - 1, points[:, 0], derivative=bool(dx))
    py = legendre01(m - 1, points[:, 1], derivative=bool(dy))
    return np.einsum("...ab,an,bn->...n", coef, px, py)


def lobatto_nodes(k: int) -> np.ndarray:
    """Gauss-Lobatto nodes on [0, 1] (the midpoint for k = 0)."""
    if k == 0:
        return np.array([0.5])
    inner = npleg.Legendre.basis(k).deriv().roots()
    return np.concatenate([[0.0], (np.sort(inner.real) + 1.0) / 2.0, [1.0]])


def _lagrange_1d(nodes, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.ones((len(nodes), s.size))
    for j, xj in enumerate(nodes):
        for m, xm in enumerate(nodes):
            if m != j:
                out[j] *= (s - xm) / (xj - xm)
    return out


@dataclass(frozen=True, eq=False)
class ReferenceScalar:
    """Nodal Q_k basis; basis function ``a + (k+1) b`` sits at node ``(s_a, s_b)``."""

    degree: int
    nodes_1d: np.ndarray

    @property
    def dim(self) -> int:
        return (self.degree + 1) ** 2

    @property
    def nodes(self) -> np.ndarray:
        X, Y = np.meshgrid(self.nodes_1d, self.nodes_1d)
        return np.column_stack([X.ravel(), Y.ravel()])

    def values(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        lx = _lagrange_1d(self.nodes_1d, points[:, 0])
        ly = _lagrange_1d(self.nodes_1d, points[:, 1])
        return (ly[:, None, :] * lx[None, :, :]).reshape(self.dim, -1)

    def interpolate(self, fun) -> np.ndarray:
        nodes = self.nodes
        return np.asarray(fun(nodes[:, 0], nodes[:, 1]), dtype=float)


@lru_cache(maxsize=None)
def scalar_reference_basis(k: int) -> ReferenceScalar:
    if not 0 <= k <= 6:
        raise InvalidParameterError(f"scalar degree must lie in [0, 6], got {k}")
    return ReferenceScalar(k, _readonly(lobatto_nodes(k)))


def _rt_span(k):
    m = k + 2
    funcs = []
    for b in range(k + 1):
        for a in range(k + 2):
            c = np.zeros((2, m, m))
            c[0, a, b] = 1.0
            funcs.append(c)
    for b in range(k + 2):
        for a in range(k + 1):
            c = np.zeros((2, m, m))
            c[1, a, b] = 1.0
            funcs.append(c)
    return np.array(funcs)


def _bdm_span(k):
    m = k + 2
    funcs = []
    for comp in range(2):
        for a in range(k + 1):
            for b in range(k + 1 - a):
                c = np.zeros((2, m, m))
                c[comp, a, b] = 1.0
                funcs.append(c)
    mono = [_monomial_coeffs(n, k + 1) for n in range(k + 2)]
    # Curl w = (dw/dy, -dw/dx) for w = x^{k+1} y and w = x y^{k+1}
    c = np.zeros((2, m, m))
    c[0] = np.outer(mono[k + 1], mono[0])
    c[1] = -(k + 1) * np.outer(mono[k], mono[1])
    funcs.append(c)
    c = np.zeros((2, m, m))
    c[0] = (k + 1) * np.outer(mono[1], mono[k])
    c[1] = -np.outer(mono[0], mono[k + 1])
    funcs.append(c)
    return np.array(funcs)


def _interior_tests(family, k):
    """Interior moment test functions as (component, a, b) Legendre indices."""
    tests = []
    if family is FluxFamily.RT:
        tests += [(0, a, b) for b in range(k + 1) for a in range(k)]
        tests += [(1, a, b) for b in range(k) for a in range(k + 1)]
    else:
        for comp in range(2):
            tests += [(comp, a, b) for a in range(k - 1) for b in range(k - 1 - a)]
    return tests


@dataclass(frozen=True, eq=False)
class DofFunctionals:
    """DOF functionals as a weight tensor acting on sampled vector values.

    ``dofs = einsum('dcp,...cp->...d', weights, values)`` with ``values`` of
    shape (..., 2, n_points) sampled at ``points``.
    """

    points: np.ndarray
    weights: np.ndarray

    def apply(self, values) -> np.ndarray:
        return np.einsum("dcp,...cp->...d", self.weights, values)


@dataclass(frozen=True, eq=False)
class ReferenceFlux:
    """Nodal RT_k / BDM_k basis dual to edge normal moments and interior moments.

    Local DOFs come in the order bottom, right, top, left edge blocks
    (``degree + 1`` moments each against Legendre polynomials along the
    edge, outward normal) followed by the interior moments.
    """

    family: FluxFamily
    degree: int
    coef: np.ndarray  # (dim, 2, m, m)
    gram_cond: float

    @property
    def dim(self) -> int:
        return self.coef.shape[0]

    @property
    def n_edge(self) -> int:
        return self.degree + 1

    @property
    def n_interior(self) -> int:
        return self.dim - 4 * self.n_edge

    def edge_slice(self, e: int) -> slice:
        return slice(e * self.n_edge, (e + 1) * self.n_edge)

    def values(self, points) -> np.ndarray:
        """Shape (dim, 2, n)."""
        return eval_tensor(self.coef, points)

    def divergence(self, points) -> np.ndarray:
        """Shape (dim, n)."""
        return eval_tensor(self.coef[:, 0], points, dx=1) + eval_tensor(self.coef[:, 1], points, dy=1)

    def functionals(self, q: int | None = None) -> DofFunctionals:
        return _dof_functionals(self.family, self.degree, q or self.degree + 2)


@lru_cache(maxsize=None)
def _dof_functionals(family: FluxFamily, k: int, q: int) -> DofFunctionals:
    rule = gauss_rule(q)
    s, w = rule.points, rule.weights
    zero, one = np.zeros_like(s), np.ones_like(s)
    edge_pts = [np.column_stack(p) for p in ((s, zero), (one, s), (s, one), (zero, s))]
    cell_pts, cell_w = rule.tensor()
    points = np.vstack(edge_pts + [cell_pts])
    nq = len(s)
    tests = _interior_tests(family, k)
    n_dof = 4 * (k + 1) + len(tests)
    W = np.zeros((n_dof, 2, len(points)))
    leg = legendre01(k, s)
    for e in range(4):
        cols = slice(e * nq, (e + 1) * nq)
        for j in range(k + 1):
            for comp in range(2):
                W[e * (k + 1) + j, comp, cols] = EDGE_NORMALS[e, comp] * w * leg[j]
    if tests:
        px = legendre01(k, cell_pts[:, 0])
        py = legendre01(k, cell_pts[:, 1])
        cols = slice(4 * nq, None)
        for r, (comp, a, b) in enumerate(tests):
            W[4 * (k + 1) + r, comp, cols] = cell_w * px[a] * py[b]
    return DofFunctionals(_readonly(points), _readonly(W))


@lru_cache(maxsize=None)
def flux_reference_basis(family, k: int) -> ReferenceFlux:
    family = FluxFamily(family)
    if family is FluxFamily.RT and not 0 <= k <= 6:
        raise InvalidParameterError(f"RT degree must lie in [0, 6], got {k}")
    if family is FluxFamily.BDM and not 1 <= k <= 6:
        raise InvalidParameterError(f"BDM degree must lie in [1, 6], got {k}")
    span = _rt_span(k) if family is FluxFamily.RT else _bdm_span(k)
    dofs = _dof_functionals(family, k, k + 2)
    gram = dofs.apply(eval_tensor(span, dofs.points))  # gram[j, i] = dof_i(span_j)
    gram = gram.T
    if gram.shape[0] != gram.shape[1]:
        raise ConstructionError(f"{family.value}_{k}: {gram.shape[0]} DOFs for {gram.shape[1]} spanning functions")
    cond = float(np.linalg.cond(gram))
    if not cond < 1e12:
        raise ConstructionError(f"{family.value}_{k}: DOF Gram matrix condition number {cond:.3e}")
    inv = np.linalg.inv(gram)
    coef = np.einsum("jm,jcab->mcab", inv, span)
    coef.setflags(write=False)
    return ReferenceFlux(family, k, coef, cond)


def piola_map(hx, hy, values=None, divergence=None):
    """Contravariant Piola transform for the axis-aligned map of [0,1]^2 onto an hx-by-hy cell.

    ``hx``/``hy`` are scalars or arrays matching the leading axes of
    ``values`` (..., 2, n) and ``divergence`` (..., n). Returns
    ``(values, divergence)``; a None input is passed through.
    """
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    if np.any(hx <= 0) or np.any(hy <= 0):
        raise InvalidParameterError("degenerate cell: widths must be positive")

    def lift(h, ndim):
        return h.reshape(h.shape + (1,) * (ndim - h.ndim))

    out_v = out_d = None
    if values is not None:
        out_v = np.array(values, dtype=float)
        n = out_v.ndim - 1
        out_v[..., 0, :] /= lift(hy, n)
        out_v[..., 1, :] /= lift(hx, n)
    if divergence is not None:
        divergence = np.asarray(divergence, dtype=float)
        out_d = divergence / lift(hx * hy, divergence.ndim)
    return out_v, out_d
