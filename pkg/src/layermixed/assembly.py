"""Assembly and solution of the discrete first-order system.

For trial ``U = (u, q)`` and test ``V = (v, r)`` the bilinear form is

    B(U, V) = (c u, v) + eps (div q, v) + (q, r) - eps (u, div r),

which gives the block matrix ``[[M_c, eps D], [-eps D^T, M_f]]`` with
``D[i, j] = (div phi_j, psi_i)``. All blocks are cell-local apart from the
edge DOFs of the flux space, so the system is kept as per-cell dense
blocks and a global sparse matrix is only built on demand.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidParameterError, NumericalFailure
from .problems import ProblemSpec
from .reference import FluxFamily, gauss_rule
from .spaces import FluxField, FluxSpace, ScalarField, ScalarSpace

logger = logging.getLogger(__name__)

SOLVERS = ("condensed", "lu", "gmres")


def _scatter_matrix(rows, cols, blocks, shape) -> sp.csr_matrix:
    r = np.broadcast_to(rows[:, :, None], blocks.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], blocks.shape).ravel()
    return sp.csr_matrix((blocks.ravel(), (r, c)), shape=shape)


def _reference_tables(scalar: ScalarSpace, flux: FluxSpace, q: int):
    pts, w = gauss_rule(q).tensor()
    phi = scalar.element.values(pts)
    vals = flux.element.values(pts)
    div = flux.element.divergence(pts)
    return pts, w, phi, vals, div


@dataclass(eq=False)
class SparseSystem:
    """Per-cell blocks of the mixed system plus lazily assembled global operators.

    Local flux blocks already include the orientation signs, so they act on
    ``global_coeffs[cell_dofs]`` directly.
    """

    scalar_space: ScalarSpace
    flux_space: FluxSpace
    problem: ProblemSpec
    quad_order: int
    mass_c: np.ndarray      # (cells, ns, ns) c-weighted scalar mass
    mass_s: np.ndarray      # (ns, ns) reference scalar mass; times cell area gives the local mass
    div_ref: np.ndarray     # (ns, nf) reference (div phi_j, psi_i), unsigned
    mass_f: np.ndarray      # (cells, nf, nf) flux mass, signed
    rhs_local: np.ndarray   # (cells, ns)
    quad_warning: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def eps(self) -> float:
        return self.problem.eps

    @property
    def n_scalar(self) -> int:
        return self.scalar_space.ndofs

    @property
    def n_flux(self) -> int:
        return self.flux_space.ndofs

    @property
    def n(self) -> int:
        return self.n_scalar + self.n_flux

    @cached_property
    def div_local(self) -> np.ndarray:
        """(cells, ns, nf) signed divergence coupling."""
        return self.div_ref[None, :, :] * self.flux_space.cell_signs[:, None, :]

    @cached_property
    def rhs(self) -> np.ndarray:
        b = np.zeros(self.n)
        np.add.at(b, self.scalar_space.cell_dofs, self.rhs_local)
        return b

    @cached_property
    def Mc(self) -> sp.csr_matrix:
        d = self.scalar_space.cell_dofs
        return _scatter_matrix(d, d, self.mass_c, (self.n_scalar,) * 2)

    @cached_property
    def Ms(self) -> sp.csr_matrix:
        """Unweighted scalar mass matrix."""
        d = self.scalar_space.cell_dofs
        area = self._areas()
        return _scatter_matrix(d, d, area[:, None, None] * self.mass_s, (self.n_scalar,) * 2)

    @cached_property
    def D(self) -> sp.csr_matrix:
        return _scatter_matrix(self.scalar_space.cell_dofs, self.flux_space.cell_dofs,
                               self.div_local, (self.n_scalar, self.n_flux))

    @cached_property
    def Mf(self) -> sp.csr_matrix:
        d = self.flux_space.cell_dofs
        return _scatter_matrix(d, d, self.mass_f, (self.n_flux,) * 2)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        eps = self.eps
        return sp.bmat([[self.Mc, eps * self.D], [-eps * self.D.T, self.Mf]], format="csr")

    def _areas(self):
        _, _, hx, hy = self.scalar_space.mesh.cell_geometry()
        return hx * hy

    def split(self, x):
        return x[:self.n_scalar], x[self.n_scalar:]

    def apply(self, x) -> np.ndarray:
        """Matrix-free product ``A @ x`` from the local blocks."""
        u, q = self.split(np.asarray(x, dtype=float))
        sd, fd = self.scalar_space.cell_dofs, self.flux_space.cell_dofs
        ul, ql = u[sd], q[fd]
        eps = self.eps
        top = np.einsum("cij,cj->ci", self.mass_c, ul) + eps * np.einsum("cij,cj->ci", self.div_local, ql)
        bot = np.einsum("cij,cj->ci", self.mass_f, ql) - eps * np.einsum("cji,cj->ci", self.div_local, ul)
        out = np.zeros(self.n)
        np.add.at(out[:self.n_scalar], sd, top)
        fout = np.zeros(self.n_flux)
        np.add.at(fout, fd, bot)
        out[self.n_scalar:] = fout
        return out

    def residual(self, x) -> float:
        b = self.rhs
        nb = np.linalg.norm(b)
        r = np.linalg.norm(self.apply(x) - b)
        return float(r / nb) if nb > 0 else float(r)


def assemble(scalar_space: ScalarSpace, flux_space: FluxSpace, problem: ProblemSpec,
             quad_order: int | None = None) -> SparseSystem:
    """Cellwise Gauss quadrature of all blocks; no boundary terms (u = 0 is natural)."""
    if scalar_space.mesh is not flux_space.mesh:
        raise InvalidParameterError("scalar and flux spaces live on different meshes")
    k = max(scalar_space.degree, flux_space.degree)
    q = k + 3 if quad_order is None else int(quad_order)
    warn = False
    if q < k + 2:
        warnings.warn(f"quadrature order {q} below minimum {k + 2}; raised to {k + 2}", stacklevel=2)
        q, warn = k + 2, True
    mesh = scalar_space.mesh
    pts, w, phi, vals, div = _reference_tables(scalar_space, flux_space, q)
    _, _, hx, hy = mesh.cell_geometry()
    area = hx * hy
    px, py = mesh.map_points(pts)
    cw = problem.c(px, py) * (area[:, None] * w)
    mass_c = np.einsum("cq,iq,jq->cij", cw, phi, phi)
    mass_s = (phi * w) @ phi.T
    div_ref = (phi * w) @ div.T
    a1 = (vals[:, 0] * w) @ vals[:, 0].T
    a2 = (vals[:, 1] * w) @ vals[:, 1].T
    signs = flux_space.cell_signs
    mass_f = ((hx / hy)[:, None, None] * a1 + (hy / hx)[:, None, None] * a2)
    mass_f *= signs[:, :, None] * signs[:, None, :]
    fw = problem.f(px, py) * (area[:, None] * w)
    rhs_local = fw @ phi.T
    return SparseSystem(scalar_space, flux_space, problem, q, mass_c, mass_s, div_ref,
                        mass_f, rhs_local, warn)


@dataclass(eq=False)
class MixedSolution:
    u: ScalarField
    flux: FluxField
    residual: float
    info: dict

    @property
    def coeffs(self) -> np.ndarray:
        return np.concatenate([self.u.coeffs, self.flux.coeffs])


def _solve_lu(system: SparseSystem, scale_flux: bool, refine: int):
    A = system.matrix
    b = system.rhs
    s = np.ones(system.n)
    if scale_flux:
        s[system.n_scalar:] = system.eps ** -0.5
    S = sp.diags(s)
    As = (S @ A @ S).tocsc()
    try:
        lu = spla.splu(As)
    except RuntimeError as exc:
        raise NumericalFailure(f"sparse LU failed: {exc}") from exc
    x = s * lu.solve(s * b)
    for _ in range(refine):
        r = b - A @ x
        x = x + s * lu.solve(s * r)
    info = {"nnz_L": int(lu.L.nnz), "nnz_U": int(lu.U.nnz)}
    return x, info


def _solve_gmres(system: SparseSystem, scale_flux: bool, tol: float = 1e-12, restart: int = 200):
    A = system.matrix
    b = system.rhs
    s = np.ones(system.n)
    if scale_flux:
        s[system.n_scalar:] = system.eps ** -0.5
    S = sp.diags(s)
    As = (S @ A @ S).tocsc()
    ilu = spla.spilu(As, drop_tol=1e-6, fill_factor=20)
    M = spla.LinearOperator(As.shape, ilu.solve)
    iters = []
    y, code = spla.gmres(As, s * b, M=M, rtol=tol, atol=0.0, restart=restart, maxiter=50,
                         callback=lambda rk: iters.append(rk), callback_type="pr_norm")
    if code != 0:
        raise NumericalFailure(f"GMRES did not converge (code {code})")
    return s * y, {"iterations": len(iters)}


def _solve_condensed(system: SparseSystem):
    """Exact cellwise elimination of the scalar unknowns and interior flux DOFs.

    The remaining edge-DOF system ``M_f + eps^2 D^T M_c^{-1} D`` (Schur
    complement on the edges) is symmetric positive definite and solved by
    sparse LU.
    """
    eps = system.eps
    fs = system.flux_space
    ne = 4 * fs.element.n_edge
    Mc, D, F = system.mass_c, system.div_local, system.rhs_local
    McinvD = np.linalg.solve(Mc, D)
    McinvF = np.linalg.solve(Mc, F[:, :, None])[:, :, 0]
    S = system.mass_f + eps**2 * np.einsum("cij,cik->cjk", D, McinvD)
    g = eps * np.einsum("cij,ci->cj", D, McinvF)
    See, Sei, Sie, Sii = S[:, :ne, :ne], S[:, :ne, ne:], S[:, ne:, :ne], S[:, ne:, ne:]
    ge, gi = g[:, :ne], g[:, ne:]
    if Sii.shape[1]:
        X = np.linalg.solve(Sii, np.concatenate([Sie, gi[:, :, None]], axis=2))
        Ke = See - Sei @ X[:, :, :ne]
        be = ge - (Sei @ X[:, :, ne:])[:, :, 0]
    else:
        Ke, be = See, ge
    edofs = fs.cell_dofs[:, :ne]
    n_e = fs.n_edge_dofs
    K = _scatter_matrix(edofs, edofs, Ke, (n_e, n_e)).tocsc()
    rhs = np.zeros(n_e)
    np.add.at(rhs, edofs, be)
    try:
        lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise NumericalFailure(f"sparse LU of the condensed system failed: {exc}") from exc
    qe = lu.solve(rhs)
    for _ in range(2):
        qe = qe + lu.solve(rhs - K @ qe)
    qel = qe[edofs]
    if Sii.shape[1]:
        qil = X[:, :, ne] - np.einsum("cij,cj->ci", X[:, :, :ne], qel)
        ql = np.concatenate([qel, qil], axis=1)
    else:
        ql = qel
    q = np.zeros(fs.ndofs)
    q[fs.cell_dofs] = ql
    ul = McinvF - eps * np.einsum("cij,cj->ci", McinvD, ql)
    u = np.zeros(system.n_scalar)
    u[system.scalar_space.cell_dofs] = ul
    return np.concatenate([u, q]), {"condensed_size": n_e, "nnz_L": int(lu.L.nnz),
                                    "nnz_U": int(lu.U.nnz)}


def solve_direct(system: SparseSystem, method: str = "condensed", scale_flux: bool = True,
                 refine: int = 2) -> MixedSolution:
    """Solve the assembled system.

    ``method`` is ``"condensed"`` (cellwise static elimination followed by
    sparse LU on the edge unknowns), ``"lu"`` (monolithic sparse LU) or
    ``"gmres"`` (ILU-preconditioned restarted GMRES). ``scale_flux``
    rescales the flux unknowns and tests by ``eps^{-1/2}`` for the
    monolithic solvers.
    """
    if method not in SOLVERS:
        raise InvalidParameterError(f"unknown solver {method!r}; choose from {SOLVERS}")
    t0 = time.perf_counter()
    if method == "lu":
        x, info = _solve_lu(system, scale_flux, refine)
    elif method == "gmres":
        x, info = _solve_gmres(system, scale_flux)
    else:
        x, info = _solve_condensed(system)
    if not np.all(np.isfinite(x)):
        raise NumericalFailure("solution contains non-finite values")
    res = system.residual(x)
    info.update(method=method, seconds=time.perf_counter() - t0, n=system.n)
    logger.debug("solved n=%d with %s: residual %.2e", system.n, method, res)
    u, q = system.split(x)
    return MixedSolution(ScalarField(system.scalar_space, u.copy()),
                         FluxField(system.flux_space, q.copy()), res, info)


def bilinear_apply(system: SparseSystem, U, V) -> float:
    """B(U, V) for coefficient vectors over the mixed space."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != (system.n,) or V.shape != (system.n,):
        raise InvalidParameterError(f"expected vectors of length {system.n}, got {U.shape} and {V.shape}")
    return float(V @ system.apply(U))


def weighted_l2_project(space: ScalarSpace, g, weight=None, quad_order: int | None = None) -> ScalarField:
    """Local projection with ``(weight (P g - g), v)_K = 0`` for all v in Q_k(K)."""
    q = quad_order or space.degree + 5
    pts, w = gauss_rule(q).tensor()
    phi = space.element.values(pts)
    px, py = space.mesh.map_points(pts)
    cw = np.ones_like(px) if weight is None else weight(px, py)
    cw = cw * w
    M = np.einsum("cq,iq,jq->cij", cw, phi, phi)
    rhs = (cw * g(px, py)) @ phi.T
    local = np.linalg.solve(M, rhs[:, :, None])[:, :, 0]
    coeffs = np.zeros(space.ndofs)
    coeffs[space.cell_dofs] = local
    return ScalarField(space, coeffs)


def canonical_interpolate(space: FluxSpace, v, quad_order: int | None = None) -> FluxField:
    """Canonical RT/BDM interpolant: edge normal moments and interior moments of ``v``.

    ``v(x, y)`` returns the pair of components.
    """
    funcs = space.element.functionals(quad_order or space.degree + 5)
    px, py = space.mesh.map_points(funcs.points)
    _, _, hx, hy = space.mesh.cell_geometry()
    v1, v2 = v(px, py)
    pulled = np.stack([np.broadcast_to(v1, px.shape) * hy[:, None],
                       np.broadcast_to(v2, px.shape) * hx[:, None]], axis=1)
    local = funcs.apply(pulled)
    coeffs = np.zeros(space.ndofs)
    coeffs[space.cell_dofs] = local * space.cell_signs
    return FluxField(space, coeffs)


def divergence_to_scalar(scalar_space: ScalarSpace, flux_space: FluxSpace) -> sp.csr_matrix:
    """Matrix mapping flux coefficients to scalar coefficients of their (cellwise exact) divergence."""
    kf, ks = flux_space.degree, scalar_space.degree
    need = kf if flux_space.family is FluxFamily.RT else kf - 1
    if ks < need:
        raise InvalidParameterError(
            f"divergence of {flux_space.family.value}_{kf} is not contained in Q_{ks}")
    pts, w = gauss_rule(max(ks, kf) + 2).tensor()
    phi = scalar_space.element.values(pts)
    div = flux_space.element.divergence(pts)
    local = np.linalg.solve((phi * w) @ phi.T, (phi * w) @ div.T)
    _, _, hx, hy = scalar_space.mesh.cell_geometry()
    blocks = local[None] / (hx * hy)[:, None, None] * flux_space.cell_signs[:, None, :]
    return _scatter_matrix(scalar_space.cell_dofs, flux_space.cell_dofs, blocks,
                           (scalar_space.ndofs, flux_space.ndofs))


def chi_test_function(system: SparseSystem, V, delta: float | None = None) -> np.ndarray:
    """Coefficients of ``(v + delta eps div r, r)`` for ``V = (v, r)``."""
    delta = system.problem.delta if delta is None else delta
    V = np.asarray(V, dtype=float)
    P = system._cache.get("div_to_scalar")
    if P is None:
        P = system._cache["div_to_scalar"] = divergence_to_scalar(system.scalar_space, system.flux_space)
    v, r = system.split(V)
    return np.concatenate([v + delta * system.eps * (P @ r), r])


def discrete_norms_sq(system: SparseSystem, V):
    """``(||v||^2, ||r||^2, ||div r||^2)`` of a discrete pair ``V = (v, r)``."""
    v, r = system.split(np.asarray(V, dtype=float))
    P = system._cache.get("div_to_scalar")
    if P is None:
        P = system._cache["div_to_scalar"] = divergence_to_scalar(system.scalar_space, system.flux_space)
    dv = P @ r
    return float(v @ (system.Ms @ v)), float(r @ (system.Mf @ r)), float(dv @ (system.Ms @ dv))


def write_matrix_market(system: SparseSystem, path) -> None:
    import scipy.io
    scipy.io.mmwrite(str(path), system.matrix, comment="mixed reaction-diffusion system")
