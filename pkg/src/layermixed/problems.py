"""Reaction-diffusion test problems ``-eps^2 lap u + c u = f`` on (0,1)^2 with u = 0 on the boundary.

The flux is ``q = -eps grad u``; its divergence follows from the first
equation of the first-order system as ``div q = (f - c u) / eps``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, UnsupportedOperationError
from .mesh import Layout
from .reference import FluxFamily

ScalarFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExactSolution:
    u: ScalarFn
    flux: Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    eps: float
    c: ScalarFn
    c0: float
    c_inf: float
    delta: float
    f: ScalarFn
    exact: ExactSolution | None = None
    layout: Layout = Layout.TWO_SIDED

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameterError(f"eps must be positive, got {self.eps}")
        if self.delta > self.c0 / self.c_inf**2 * (1 + 1e-14):
            raise InvalidParameterError(f"delta={self.delta} exceeds c0/c_inf^2={self.c0 / self.c_inf**2}")


def _layer_parts(s, eps):
    """Boundary-layer term g(s) = (e^{-s/eps} - e^{-1/eps}) / (1 - e^{-1/eps}) and g', g''."""
    e1 = np.exp(-1.0 / eps)
    denom = -np.expm1(-1.0 / eps)
    es = np.exp(-s / eps)
    return (es - e1) / denom, -es / (eps * denom), es / (eps**2 * denom)


def make_corner_layer_problem(eps: float, constant_c: bool = False) -> ProblemSpec:
    """Manufactured problem with layers at x = 0 and y = 0 and a corner layer at the origin.

    ``c = 1 + x^2 y^2 exp(xy/2)`` unless ``constant_c`` selects ``c = 1``.
    """
    if not 1e-8 <= eps <= 1:
        raise InvalidParameterError(f"eps must lie in [1e-8, 1], got {eps}")
    hp = np.pi / 2

    def X(x):
        g, g1, g2 = _layer_parts(x, eps)
        return np.cos(hp * x) - g, -hp * np.sin(hp * x) - g1, -hp**2 * np.cos(hp * x) - g2

    def Y(y):
        g, g1, g2 = _layer_parts(y, eps)
        return 1.0 - y - g, -1.0 - g1, -g2

    if constant_c:
        def c(x, y):
            return np.ones(np.broadcast(x, y).shape)
        c_inf = 1.0
    else:
        def c(x, y):
            return 1.0 + x**2 * y**2 * np.exp(x * y / 2)
        c_inf = 1.0 + np.exp(0.5)

    def u(x, y):
        return X(x)[0] * Y(y)[0]

    def flux(x, y):
        x0, x1, _ = X(x)
        y0, y1, _ = Y(y)
        return -eps * x1 * y0, -eps * x0 * y1

    def f(x, y):
        x0, _, x2 = X(x)
        y0, _, y2 = Y(y)
        return -eps**2 * (x2 * y0 + x0 * y2) + c(x, y) * x0 * y0

    return ProblemSpec("corner-layer" if not constant_c else "corner-layer-c1", eps, c, 1.0, c_inf,
                       1.0 / c_inf**2, f, ExactSolution(u, flux), Layout.LEFT_ONLY)


def make_polynomial_problem(eps: float, k: int, family=FluxFamily.RT) -> ProblemSpec:
    """Problem with exact solution ``x(1-x) y(1-y)``, which the discrete space reproduces.

    Needs ``k >= 2`` for RT_k and ``k >= 3`` for BDM_k so that the flux
    ``-eps grad u`` lies in the local flux space.
    """
    family = FluxFamily(family)
    need = 2 if family is FluxFamily.RT else 3
    if k < need:
        raise InvalidParameterError(
            f"{family.value}_{k} cannot represent the flux of x(1-x)y(1-y) "
            f"(components in Q_(1,2) x Q_(2,1)); use k >= {need}")
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")

    def u(x, y):
        return x * (1 - x) * y * (1 - y)

    def flux(x, y):
        return -eps * (1 - 2 * x) * y * (1 - y), -eps * x * (1 - x) * (1 - 2 * y)

    def c(x, y):
        return np.ones(np.broadcast(x, y).shape)

    def f(x, y):
        return 2 * eps**2 * (y * (1 - y) + x * (1 - x)) + u(x, y)

    return ProblemSpec("polynomial", eps, c, 1.0, 1.0, 1.0, f, ExactSolution(u, flux),
                       Layout.TWO_SIDED)


def eval_exact(problem: ProblemSpec, x, y):
    """Exact ``(u, (q1, q2), div q)`` at points; ``div q`` from ``(f - c u) / eps``."""
    if problem.exact is None:
        raise UnsupportedOperationError(f"problem {problem.name!r} has no exact solution")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = problem.exact.u(x, y)
    q1, q2 = problem.exact.flux(x, y)
    div = (problem.f(x, y) - problem.c(x, y) * u) / problem.eps
    return u, (q1, q2), div
