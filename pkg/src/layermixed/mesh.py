"""Layer-adapted S-type meshes in 1D and their tensor products on (0, 1)^2.

A mesh-generating function ``phi`` on ``[0, 1/2]`` with ``phi(0) = 0`` and
``phi(1/2) = ln N`` places the fine points ``x_i = sigma * eps * phi(t_i)``
inside the boundary layers; outside the transition point ``lambda`` the
mesh is uniform.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)


class MeshFamily(str, Enum):
    SHISHKIN = "shishkin"
    BAKHVALOV_S = "bakhvalov-s"


class Layout(str, Enum):
    TWO_SIDED = "two-sided"
    LEFT_ONLY = "left-only"


class Region(str, Enum):
    COARSE = "coarse"
    LAYER_X = "layer-x"
    LAYER_Y = "layer-y"
    CORNER = "corner"


def _as_family(family) -> MeshFamily:
    try:
        return MeshFamily(family)
    except ValueError:
        raise InvalidParameterError(f"unknown mesh family {family!r}") from None


def _as_layout(layout) -> Layout:
    try:
        return Layout(layout)
    except ValueError:
        raise InvalidParameterError(f"unknown layout {layout!r}") from None


@dataclass(frozen=True)
class MeshGenFunction:
    """Mesh-generating function phi and characterising function psi = exp(-phi)."""

    family: MeshFamily
    N: int

    def __post_init__(self):
        object.__setattr__(self, "family", _as_family(self.family))
        if self.N < 2:
            raise InvalidParameterError(f"N must be >= 2, got {self.N}")

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        if self.family is MeshFamily.SHISHKIN:
            return 2.0 * t * np.log(self.N)
        return -np.log1p(-2.0 * t * (1.0 - 1.0 / self.N))

    def psi(self, t):
        return np.exp(-self.phi(t))

    @property
    def max_abs_psi_prime(self) -> float:
        if self.family is MeshFamily.SHISHKIN:
            return 2.0 * np.log(self.N)
        return 2.0 * (1.0 - 1.0 / self.N)


def transition_point(N: int, eps: float, sigma: float, layout=Layout.TWO_SIDED) -> float:
    """Return ``min(sigma * eps * ln N, cap)``; cap is 1/4 (two-sided) or 1/2 (left-only)."""
    layout = _as_layout(layout)
    if not eps > 0 or not sigma > 0:
        raise InvalidParameterError(f"eps and sigma must be positive, got eps={eps}, sigma={sigma}")
    if N < 2:
        raise InvalidParameterError(f"N must be >= 2, got {N}")
    cap = 0.25 if layout is Layout.TWO_SIDED else 0.5
    return min(sigma * eps * np.log(N), cap)


@dataclass(frozen=True, eq=False)
class Mesh1D:
    points: np.ndarray
    N: int
    eps: float
    sigma: float
    lam: float
    family: MeshFamily
    layout: Layout
    capped: bool
    banded: bool = True

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def n_fine(self) -> int:
        """Number of graded cells per layer."""
        return self.N // 4 if self.layout is Layout.TWO_SIDED else self.N // 2

    def fine_mask(self) -> np.ndarray:
        """Boolean mask over cells: True for cells inside a layer band."""
        mask = np.zeros(self.N, dtype=bool)
        if not self.banded:
            return mask
        m = self.n_fine
        mask[:m] = True
        if self.layout is Layout.TWO_SIDED:
            mask[self.N - m:] = True
        return mask

    def header(self) -> str:
        return (f"# family={self.family.value} N={self.N} eps={self.eps!r} "
                f"sigma={self.sigma!r} layout={self.layout.value} lambda={self.lam!r}")


def build_mesh_1d(N: int, eps: float, sigma: float,
                  family=MeshFamily.BAKHVALOV_S, layout=Layout.TWO_SIDED) -> Mesh1D:
    family = _as_family(family)
    layout = _as_layout(layout)
    if N < 8:
        raise InvalidParameterError(f"N must be >= 8, got {N}")
    if layout is Layout.TWO_SIDED and N % 4:
        raise InvalidParameterError(f"two-sided layout needs N divisible by 4, got N={N}")
    if layout is Layout.LEFT_ONLY and N % 2:
        raise InvalidParameterError(f"left-only layout needs N divisible by 2, got N={N}")
    lam = transition_point(N, eps, sigma, layout)
    gen = MeshGenFunction(family, N)
    i = np.arange(N + 1, dtype=float)
    capped = lam < sigma * eps * np.log(N)

    if layout is Layout.TWO_SIDED:
        q = N // 4
        x = 2.0 * i / N * (1.0 - 2.0 * lam) - 0.5 + 2.0 * lam
        if not capped:
            x[:q + 1] = sigma * eps * gen.phi(2.0 * i[:q + 1] / N)
            x[3 * q:] = 1.0 - sigma * eps * gen.phi(2.0 - 2.0 * i[3 * q:] / N)
        x[q], x[3 * q] = lam, 1.0 - lam
    else:
        h = N // 2
        x = lam + (2.0 * i / N - 1.0) * (1.0 - lam)
        if capped:
            x[:h + 1] = 2.0 * i[:h + 1] / N * lam
        else:
            x[:h + 1] = sigma * eps * gen.phi(i[:h + 1] / N)
        x[h] = lam
    x[0], x[-1] = 0.0, 1.0
    if capped:
        logger.info("transition point capped at %g (N=%d, eps=%g): quasi-uniform mesh", lam, N, eps)
    if np.any(np.diff(x) <= 0):
        raise InvalidParameterError(f"mesh points not strictly increasing (N={N}, eps={eps}, sigma={sigma})")
    x.setflags(write=False)
    return Mesh1D(x, N, float(eps), float(sigma), float(lam), family, layout, bool(capped))


def uniform_mesh_1d(N: int) -> Mesh1D:
    """Uniform mesh with N cells and no layer bands (any N >= 1)."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    x = np.linspace(0.0, 1.0, N + 1)
    x.setflags(write=False)
    return Mesh1D(x, N, 1.0, 1.0, 0.25, MeshFamily.SHISHKIN, Layout.TWO_SIDED, True, banded=False)


@dataclass(frozen=True)
class MeshStats:
    h: float
    hmin: float
    max_abs_psi_prime: float
    bound_ratio: float
    hmin_scaled: float


def mesh_stats(mesh: Mesh1D) -> MeshStats:
    """Layer-band width data and the cellwise check of the graded-width bound.

    ``bound_ratio`` is the largest ``h_i / (sigma eps N^-1 max|psi'| exp(d/(sigma eps)))``
    over fine cells, with ``d`` the distance from the boundary to the cell end
    nearest to it (the worst point of the cell). ``hmin_scaled`` is ``hmin N / eps``.
    """
    gen = MeshGenFunction(mesh.family, mesh.N)
    widths = mesh.widths
    fine = mesh.fine_mask()
    x = mesh.points
    d = np.minimum(x[:-1], 1.0 - x[1:])
    if mesh.layout is Layout.LEFT_ONLY:
        d = x[:-1].copy()
    scale = mesh.sigma * mesh.eps / mesh.N * gen.max_abs_psi_prime
    with np.errstate(over="ignore"):
        bound = scale * np.exp(d / (mesh.sigma * mesh.eps))
    ratio = float(np.max(widths[fine] / bound[fine]))
    hmin = float(widths.min())
    stats = MeshStats(float(widths[fine].max()), hmin, gen.max_abs_psi_prime, ratio,
                      hmin * mesh.N / mesh.eps)
    logger.debug("mesh stats %s", stats)
    return stats


@dataclass(frozen=True, eq=False)
class TensorMesh2D:
    """Rectangular cells ``K_ij = (x_{i-1}, x_i) x (y_{j-1}, y_j)``.

    Cells are numbered ``c = j * Nx + i`` with zero-based ``i`` along x.
    """

    mesh_x: Mesh1D
    mesh_y: Mesh1D
    regions: np.ndarray = field(repr=False)

    @property
    def Nx(self) -> int:
        return self.mesh_x.N

    @property
    def Ny(self) -> int:
        return self.mesh_y.N

    @property
    def n_cells(self) -> int:
        return self.Nx * self.Ny

    def cell_index(self, i, j):
        return j * self.Nx + i

    def cell_ij(self):
        """Zero-based (i, j) arrays for all cells in numbering order."""
        c = np.arange(self.n_cells)
        return c % self.Nx, c // self.Nx

    def cell_geometry(self):
        """Return ``(x0, y0, hx, hy)`` arrays of length ``n_cells``."""
        i, j = self.cell_ij()
        x, y = self.mesh_x.points, self.mesh_y.points
        return x[i], y[j], np.diff(x)[i], np.diff(y)[j]

    def map_points(self, ref_points, cells=None):
        """Map reference points (n, 2) to physical coordinates, shape (n_cells, n) each."""
        x0, y0, hx, hy = self.cell_geometry()
        if cells is not None:
            x0, y0, hx, hy = x0[cells], y0[cells], hx[cells], hy[cells]
        ref_points = np.asarray(ref_points)
        px = x0[:, None] + hx[:, None] * ref_points[None, :, 0]
        py = y0[:, None] + hy[:, None] * ref_points[None, :, 1]
        return px, py

    def locate(self, x, y):
        """Cell index and reference coordinates of physical points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xs, ys = self.mesh_x.points, self.mesh_y.points
        i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, self.Nx - 1)
        j = np.clip(np.searchsorted(ys, y, side="right") - 1, 0, self.Ny - 1)
        xh = (x - xs[i]) / (xs[i + 1] - xs[i])
        yh = (y - ys[j]) / (ys[j + 1] - ys[j])
        return self.cell_index(i, j), xh, yh

    def region_counts(self) -> dict:
        return {r: int(np.count_nonzero(self.regions == r.value)) for r in Region}


def build_tensor_mesh(mesh_x: Mesh1D, mesh_y: Mesh1D | None = None) -> TensorMesh2D:
    mesh_y = mesh_x if mesh_y is None else mesh_y
    fx = mesh_x.fine_mask()
    fy = mesh_y.fine_mask()
    FX, FY = np.meshgrid(fx, fy)  # shape (Ny, Nx), row j
    regions = np.full(FX.shape, Region.COARSE.value, dtype=object)
    regions[FX & ~FY] = Region.LAYER_X.value
    regions[~FX & FY] = Region.LAYER_Y.value
    regions[FX & FY] = Region.CORNER.value
    regions = regions.ravel()
    regions.setflags(write=False)
    return TensorMesh2D(mesh_x, mesh_y, regions)


def write_mesh(mesh: Mesh1D, path) -> None:
    lines = [mesh.header()] + [repr(float(v)) for v in mesh.points]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh_points(path):
    """Read a mesh dump; returns ``(header_fields, points)``."""
    text = Path(path).read_text().splitlines()
    header = {}
    if text and text[0].startswith("#"):
        for item in text[0][1:].split():
            key, _, value = item.partition("=")
            header[key] = value
        text = text[1:]
    return header, np.array([float(t) for t in text if t.strip()])
