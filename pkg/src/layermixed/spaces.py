"""Global discrete spaces on a tensor mesh.

The scalar space is fully discontinuous Q_k. The flux space is H(div)
conforming: each edge carries ``k + 1`` normal-moment DOFs shared by the
cells on either side, oriented by the global normal (+x on vertical edges,
+y on horizontal edges).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .mesh import TensorMesh2D
from .reference import (EDGE_GLOBAL_SIGN, FluxFamily, ReferenceFlux, ReferenceScalar,
                        flux_reference_basis, piola_map, scalar_reference_basis)


@dataclass(frozen=True, eq=False)
class ScalarSpace:
    mesh: TensorMesh2D
    element: ReferenceScalar
    cell_dofs: np.ndarray

    @property
    def degree(self) -> int:
        return self.element.degree

    @property
    def ndofs(self) -> int:
        return self.mesh.n_cells * self.element.dim

    @property
    def cell_signs(self) -> np.ndarray:
        return np.ones(self.cell_dofs.shape)


@dataclass(frozen=True, eq=False)
class FluxSpace:
    mesh: TensorMesh2D
    element: ReferenceFlux
    cell_dofs: np.ndarray
    cell_signs: np.ndarray
    ndofs: int
    n_vertical: int
    n_horizontal: int

    @property
    def family(self) -> FluxFamily:
        return self.element.family

    @property
    def degree(self) -> int:
        return self.element.degree

    def vertical_edge_dofs(self, i, j) -> np.ndarray:
        """Global DOFs of the vertical edge at x_i in cell row j."""
        n = self.element.n_edge
        return (j * (self.mesh.Nx + 1) + i) * n + np.arange(n)

    def horizontal_edge_dofs(self, i, j) -> np.ndarray:
        """Global DOFs of the horizontal edge at y_j in cell column i."""
        n = self.element.n_edge
        return (self.n_vertical + j * self.mesh.Nx + i) * n + np.arange(n)

    @property
    def n_edge_dofs(self) -> int:
        return (self.n_vertical + self.n_horizontal) * self.element.n_edge


def build_scalar_space(mesh: TensorMesh2D, k: int) -> ScalarSpace:
    element = scalar_reference_basis(k)
    dofs = np.arange(mesh.n_cells * element.dim).reshape(mesh.n_cells, element.dim)
    dofs.setflags(write=False)
    return ScalarSpace(mesh, element, dofs)


def build_flux_space(mesh: TensorMesh2D, family, k: int) -> FluxSpace:
    try:
        family = FluxFamily(family)
    except ValueError:
        raise InvalidParameterError(f"unsupported flux family {family!r}") from None
    element = flux_reference_basis(family, k)
    Nx, Ny = mesh.Nx, mesh.Ny
    ne, ni = element.n_edge, element.n_interior
    n_vert = (Nx + 1) * Ny
    n_horz = Nx * (Ny + 1)
    i, j = mesh.cell_ij()
    c = np.arange(mesh.n_cells)
    offs = np.arange(ne)
    edge_ids = [
        n_vert + j * Nx + i,            # bottom
        j * (Nx + 1) + i + 1,           # right
        n_vert + (j + 1) * Nx + i,      # top
        j * (Nx + 1) + i,               # left
    ]
    blocks = [e[:, None] * ne + offs for e in edge_ids]
    interior_base = (n_vert + n_horz) * ne
    blocks.append(interior_base + c[:, None] * ni + np.arange(ni))
    dofs = np.hstack(blocks)
    signs = np.ones(element.dim)
    for e in range(4):
        signs[element.edge_slice(e)] = EDGE_GLOBAL_SIGN[e]
    signs = np.broadcast_to(signs, dofs.shape).copy()
    dofs.setflags(write=False)
    signs.setflags(write=False)
    return FluxSpace(mesh, element, dofs, signs, interior_base + mesh.n_cells * ni, n_vert, n_horz)


class ScalarField:
    """Coefficient vector over a ScalarSpace."""

    def __init__(self, space: ScalarSpace, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.ndofs,):
            raise InvalidParameterError(f"expected {space.ndofs} coefficients, got {coeffs.shape}")
        self.space = space
        self.coeffs = coeffs

    def local_coeffs(self) -> np.ndarray:
        return self.coeffs[self.space.cell_dofs]

    def values_at(self, ref_points, cells=None) -> np.ndarray:
        """Values at reference points mapped into every cell (or ``cells``), shape (n_cells, n)."""
        local = self.local_coeffs() if cells is None else self.local_coeffs()[cells]
        return local @ self.space.element.values(ref_points)

    def __call__(self, x, y) -> np.ndarray:
        cells, xh, yh = self.space.mesh.locate(x, y)
        phi = self.space.element.values(np.column_stack([np.ravel(xh), np.ravel(yh)]))
        return np.einsum("pi,ip->p", self.local_coeffs()[np.ravel(cells)], phi)


class FluxField:
    """Coefficient vector over a FluxSpace; evaluation applies the Piola map."""

    def __init__(self, space: FluxSpace, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.ndofs,):
            raise InvalidParameterError(f"expected {space.ndofs} coefficients, got {coeffs.shape}")
        self.space = space
        self.coeffs = coeffs

    def local_coeffs(self) -> np.ndarray:
        return self.coeffs[self.space.cell_dofs] * self.space.cell_signs

    def _local(self, cells):
        _, _, hx, hy = self.space.mesh.cell_geometry()
        local = self.local_coeffs()
        if cells is None:
            return local, hx, hy
        return local[cells], hx[cells], hy[cells]

    def values_at(self, ref_points, cells=None) -> np.ndarray:
        """Physical vector values, shape (n_cells, 2, n)."""
        local, hx, hy = self._local(cells)
        ref = np.einsum("ci,ikn->ckn", local, self.space.element.values(ref_points))
        return piola_map(hx, hy, values=ref)[0]

    def divergence_at(self, ref_points, cells=None) -> np.ndarray:
        local, hx, hy = self._local(cells)
        return piola_map(hx, hy, divergence=local @ self.space.element.divergence(ref_points))[1]

    def __call__(self, x, y) -> np.ndarray:
        cells, xh, yh = self.space.mesh.locate(x, y)
        cells = np.ravel(cells)
        pts = np.column_stack([np.ravel(xh), np.ravel(yh)])
        _, _, hx, hy = self.space.mesh.cell_geometry()
        ref = np.einsum("pi,ikp->pk", self.local_coeffs()[cells], self.space.element.values(pts))
        return np.stack([ref[:, 0] / hy[cells], ref[:, 1] / hx[cells]])


def normal_jump_diagnostic(field: FluxField, samples_per_edge: int = 5) -> float:
    """Largest |[v.n]| over interior edges at equispaced interior sample points."""
    mesh = field.space.mesh
    s = (np.arange(samples_per_edge) + 0.5) / samples_per_edge
    zero, one = np.zeros_like(s), np.ones_like(s)
    i, j = mesh.cell_ij()
    jump = 0.0
    right = field.values_at(np.column_stack([one, s]))[:, 0]
    left = field.values_at(np.column_stack([zero, s]))[:, 0]
    inner = i < mesh.Nx - 1
    if inner.any():
        c = np.nonzero(inner)[0]
        jump = max(jump, float(np.abs(right[c] - left[c + 1]).max()))
    top = field.values_at(np.column_stack([s, one]))[:, 1]
    bottom = field.values_at(np.column_stack([s, zero]))[:, 1]
    inner = j < mesh.Ny - 1
    if inner.any():
        c = np.nonzero(inner)[0]
        jump = max(jump, float(np.abs(top[c] - bottom[c + mesh.Nx]).max()))
    return jump
