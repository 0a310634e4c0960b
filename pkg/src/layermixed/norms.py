"""Error norms of the mixed discretisation and observed convergence rates."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .problems import ProblemSpec, eval_exact
from .reference import gauss_rule
from .spaces import FluxField, ScalarField


def triple_norms(err_u: float, err_flux: float, err_div: float, eps: float, delta: float):
    """Return ``(|||e|||, |||e|||_bal)`` from the three L2 error components.

    |||e|||^2     = |e_u|^2 + |e_q|^2 + delta eps^2 |div e_q|^2
    |||e|||_bal^2 = |e_u|^2 + |e_q|^2 / eps + delta eps |div e_q|^2
    """
    tnorm = math.hypot(err_u, err_flux, math.sqrt(delta) * eps * err_div)
    tbal = math.hypot(err_u, err_flux / math.sqrt(eps), math.sqrt(delta * eps) * err_div)
    return tnorm, tbal


@dataclass(frozen=True)
class ErrorReport:
    err_u: float
    err_flux: float
    err_div: float
    tnorm: float
    tnorm_bal: float
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(out.pop("meta"))
        return out


def _graded_rule(q: int, tau: float):
    """Composite Gauss rule on [0, 1] with breakpoints tau, 2 tau, 4 tau, ... toward s = 0."""
    base = gauss_rule(q)
    cuts = [0.0]
    t = tau
    while t < 1.0:
        cuts.append(t)
        t *= 2.0
    cuts.append(1.0)
    a, b = np.array(cuts[:-1]), np.array(cuts[1:])
    pts = (a[:, None] + (b - a)[:, None] * base.points).ravel()
    wts = ((b - a)[:, None] * base.weights).ravel()
    return pts, wts


def _axis_rules(mesh1d, q):
    """Per-cell rule class along one axis and the rules themselves.

    Coarse cells next to the fine band see the unresolved tail of the
    layer (size about N^-sigma over a width eps); their rule is graded
    toward the shared edge. Class 0 is the plain Gauss rule, 1 grades
    toward the left end of the cell and 2 toward the right end.
    """
    base = gauss_rule(q)
    rules = {0: (base.points, base.weights)}
    cls = np.zeros(mesh1d.N, dtype=int)
    fine = mesh1d.fine_mask()
    if fine.any() and not mesh1d.capped:
        coarse = ~fine
        cls[coarse & np.r_[False, fine[:-1]]] = 1
        cls[coarse & np.r_[fine[1:], False]] = 2
        h = mesh1d.widths
        for c in (1, 2):
            if (cls == c).any():
                tau = mesh1d.eps / h[cls == c].max()
                if tau < 0.5:
                    pts, wts = _graded_rule(q, tau)
                    rules[c] = (pts if c == 1 else 1.0 - pts[::-1], wts if c == 1 else wts[::-1])
                else:
                    cls[cls == c] = 0
    return cls, rules


def cell_quadrature_groups(mesh, q: int):
    """Yield ``(cells, ref_points, weights)`` covering every cell once; weights include the cell area."""
    cx, rx = _axis_rules(mesh.mesh_x, q)
    cy, ry = _axis_rules(mesh.mesh_y, q)
    i, j = mesh.cell_ij()
    _, _, hx, hy = mesh.cell_geometry()
    for a in rx:
        for b in ry:
            cells = np.nonzero((cx[i] == a) & (cy[j] == b))[0]
            if cells.size == 0:
                continue
            (xs, wx), (ys, wy) = rx[a], ry[b]
            X, Y = np.meshgrid(xs, ys)
            WX, WY = np.meshgrid(wx, wy)
            pts = np.column_stack([X.ravel(), Y.ravel()])
            w = (WX * WY).ravel()
            yield cells, pts, w[None, :] * (hx[cells] * hy[cells])[:, None]


def _integrate(mesh, q, integrand) -> float:
    """Sum over cell groups of ``integrand(cells, ref_points, phys_x, phys_y)`` against the weights."""
    total = 0.0
    for cells, pts, wc in cell_quadrature_groups(mesh, q):
        px, py = mesh.map_points(pts, cells)
        total += float(np.sum(wc * integrand(cells, pts, px, py)))
    return total


def scalar_l2_error(field: ScalarField, fun, quad_order: int | None = None) -> float:
    q = quad_order or field.space.degree + 5
    return math.sqrt(_integrate(field.space.mesh, q, lambda c, p, x, y: (fun(x, y) - field.values_at(p, c)) ** 2))


def flux_l2_error(field: FluxField, fun, quad_order: int | None = None) -> float:
    def sq(cells, pts, x, y):
        v1, v2 = fun(x, y)
        vals = field.values_at(pts, cells)
        return (v1 - vals[:, 0]) ** 2 + (v2 - vals[:, 1]) ** 2

    return math.sqrt(_integrate(field.space.mesh, quad_order or field.space.degree + 5, sq))


def divergence_l2_error(field: FluxField, fun, quad_order: int | None = None) -> float:
    q = quad_order or field.space.degree + 5
    return math.sqrt(_integrate(field.space.mesh, q,
                                lambda c, p, x, y: (fun(x, y) - field.divergence_at(p, c)) ** 2))


def compute_errors(solution, problem: ProblemSpec, quad_order: int | None = None,
                   meta: dict | None = None) -> ErrorReport:
    """All error norms of a MixedSolution against the problem's exact fields.

    Cellwise Gauss quadrature with ``quad_order`` points per direction
    (default: flux degree + 5), graded in coarse cells touching a layer band.
    """
    u_field, q_field = solution.u, solution.flux
    mesh = u_field.space.mesh
    q = quad_order or max(u_field.space.degree, q_field.space.degree) + 5
    sums = np.zeros(3)
    for cells, pts, wc in cell_quadrature_groups(mesh, q):
        px, py = mesh.map_points(pts, cells)
        u, (q1, q2), div = eval_exact(problem, px, py)
        vals = q_field.values_at(pts, cells)
        sums += [np.sum(wc * (u - u_field.values_at(pts, cells)) ** 2),
                 np.sum(wc * ((q1 - vals[:, 0]) ** 2 + (q2 - vals[:, 1]) ** 2)),
                 np.sum(wc * (div - q_field.divergence_at(pts, cells)) ** 2)]
    err_u, err_q, err_d = np.sqrt(sums)
    tnorm, tbal = triple_norms(err_u, err_q, err_d, problem.eps, problem.delta)
    info = {"eps": problem.eps, "quad": q}
    info.update(meta or {})
    return ErrorReport(float(err_u), float(err_q), float(err_d), tnorm, tbal, info)


def convergence_rates(errors, Ns=None, shishkin: bool = False):
    """Observed orders between consecutive entries; the first entry has no rate (None).

    With ``Ns`` given and ``shishkin=True`` the step variable is ``ln N / N``
    instead of ``1 / N``.
    """
    errors = list(errors)
    if Ns is None:
        Ns = [None] * len(errors)
    rates = [None]
    for j in range(1, len(errors)):
        a, b = errors[j - 1], errors[j]
        if not (a and b) or a <= 0 or b <= 0 or not (math.isfinite(a) and math.isfinite(b)):
            rates.append(None)
            continue
        if Ns[j] is None:
            rates.append(math.log2(a / b))
        else:
            n0, n1 = Ns[j - 1], Ns[j]
            h0, h1 = (math.log(n0) / n0, math.log(n1) / n1) if shishkin else (1 / n0, 1 / n1)
            rates.append(math.log(a / b) / math.log(h0 / h1))
    return rates
