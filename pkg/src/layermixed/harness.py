"""Experiment pipeline: mesh -> spaces -> assembly -> solve -> error report, plus sweeps and CSV tables."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .assembly import SOLVERS, assemble, solve_direct, write_matrix_market
from .errors import InvalidParameterError, LayerMixedError
from .mesh import Layout, MeshFamily, build_mesh_1d, build_tensor_mesh, write_mesh
from .norms import ErrorReport, compute_errors, convergence_rates
from .problems import make_polynomial_problem, make_corner_layer_problem
from .reference import FluxFamily
from .spaces import build_flux_space, build_scalar_space

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ["schema_version", "problem", "mesh", "layout", "family", "k", "sigma", "N", "eps",
               "quad", "err_u", "err_flux", "err_div", "tnorm", "tnorm_bal", "rate_bal",
               "solve_residual", "wall_ms"]
PROBLEMS = ("corner-layer", "corner-layer-c1", "polynomial")
QUAD_DRIFT_TOL = 1e-3


def default_sigma(family, k: int) -> float:
    return k + 1.5 if FluxFamily(family) is FluxFamily.RT else k + 1.0


def _int_list(value):
    if isinstance(value, str):
        value = [v for v in value.replace(" ", "").split(",") if v]
    return [int(v) for v in value]


def _float_list(value):
    if isinstance(value, str):
        value = [v for v in value.replace(" ", "").split(",") if v]
    return [float(v) for v in value]


def _optional(conv):
    def parse(value):
        if value is None or (isinstance(value, str) and value.lower() in ("", "none", "default")):
            return None
        return conv(value)
    return parse


def _bool(value):
    if isinstance(value, str):
        return value.lower() in ("1", "true", "yes", "on")
    return bool(value)


@dataclass(frozen=True)
class RunConfig:
    problem: str = "corner-layer"
    mesh: str = MeshFamily.BAKHVALOV_S.value
    layout: str | None = None
    family: str = FluxFamily.RT.value
    k: list = field(default_factory=lambda: [1])
    sigma: float | None = None
    N: list = field(default_factory=lambda: [16])
    eps: list = field(default_factory=lambda: [1e-4])
    quad: int | None = None
    quad_err: int | None = None
    solver: str = "condensed"
    quad_check: bool = True
    timing: bool = False
    out: str | None = None
    dump_mesh: str | None = None
    dump_matrix: str | None = None

    _CONVERTERS = {
        "k": _int_list, "N": _int_list, "eps": _float_list, "sigma": _optional(float),
        "quad": _optional(int), "quad_err": _optional(int), "layout": _optional(str),
        "out": _optional(str), "dump_mesh": _optional(str), "dump_matrix": _optional(str),
        "quad_check": _bool, "timing": _bool,
    }

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in values.items():
            key = key.replace("-", "_")
            if key not in names:
                raise InvalidParameterError(f"unknown config key {key!r}")
            kwargs[key] = cls._CONVERTERS.get(key, str)(value)
        return cls(**kwargs).validated()

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        """Flat ``key = value`` file; ``#`` starts a comment."""
        values = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InvalidParameterError(f"{path}:{lineno}: expected key=value")
            values[key.strip()] = value.strip()
        values.update(overrides or {})
        return cls.from_mapping(values)

    def resolved_layout(self) -> Layout:
        if self.layout:
            return Layout(self.layout)
        return Layout.LEFT_ONLY if self.problem.startswith("corner-layer") else Layout.TWO_SIDED

    def sigma_for(self, k: int) -> float:
        return self.sigma if self.sigma is not None else default_sigma(self.family, k)

    def validated(self) -> "RunConfig":
        if self.problem not in PROBLEMS:
            raise InvalidParameterError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        try:
            MeshFamily(self.mesh)
            FluxFamily(self.family)
            layout = self.resolved_layout()
        except ValueError as exc:
            raise InvalidParameterError(str(exc)) from None
        if self.solver not in SOLVERS:
            raise InvalidParameterError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        for name in ("k", "N", "eps"):
            if not getattr(self, name):
                raise InvalidParameterError(f"config list {name!r} is empty")
        step = 4 if layout is Layout.TWO_SIDED else 2
        for n in self.N:
            if n < 8 or n % step:
                raise InvalidParameterError(f"N={n} must be >= 8 and divisible by {step} for the {layout.value} layout")
        if any(e <= 0 for e in self.eps):
            raise InvalidParameterError("eps values must be positive")
        if self.sigma is not None and self.sigma <= 0:
            raise InvalidParameterError("sigma must be positive")
        return self


def _make_problem(config: RunConfig, eps: float, k: int):
    if config.problem == "polynomial":
        return make_polynomial_problem(eps, k, config.family)
    return make_corner_layer_problem(eps, constant_c=config.problem == "corner-layer-c1")


def _dump_path(template: str, N: int, eps: float, k: int, multi: bool) -> Path:
    path = Path(template)
    if not multi:
        return path
    return path.with_name(f"{path.stem}_k{k}_N{N}_eps{eps:g}{path.suffix}")


def run_single(config: RunConfig, N: int | None = None, eps: float | None = None,
               k: int | None = None) -> ErrorReport:
    """One solve; N, eps and k default to the first entries of the config lists."""
    N = config.N[0] if N is None else N
    eps = config.eps[0] if eps is None else eps
    k = config.k[0] if k is None else k
    multi = len(config.N) * len(config.eps) * len(config.k) > 1
    t0 = time.perf_counter()
    layout = config.resolved_layout()
    sigma = config.sigma_for(k)
    m = build_mesh_1d(N, eps, sigma, config.mesh, layout)
    mesh = build_tensor_mesh(m, m)
    problem = _make_problem(config, eps, k)
    scalar = build_scalar_space(mesh, k)
    flux = build_flux_space(mesh, config.family, k)
    system = assemble(scalar, flux, problem, config.quad)
    if config.dump_mesh:
        write_mesh(m, _dump_path(config.dump_mesh, N, eps, k, multi))
    if config.dump_matrix:
        write_matrix_market(system, _dump_path(config.dump_matrix, N, eps, k, multi))
    solution = solve_direct(system, config.solver)
    q_err = config.quad_err or k + 5
    meta = {"N": N, "sigma": sigma, "family": FluxFamily(config.family).value, "k": k,
            "mesh": config.mesh, "layout": layout.value, "problem": config.problem,
            "quad": q_err, "assembly_quad": system.quad_order,
            "solve_residual": solution.residual, "lambda_capped": m.capped}
    report = compute_errors(solution, problem, q_err, meta)
    if config.quad_check:
        check = compute_errors(solution, problem, q_err + 2)
        drift = max(abs(a - b) / b for a, b in
                    ((report.err_u, check.err_u), (report.err_flux, check.err_flux),
                     (report.err_div, check.err_div)) if b > 0) if check.err_u > 0 else 0.0
        report.meta["quad_drift"] = drift
        if drift > QUAD_DRIFT_TOL:
            logger.warning("error quadrature not converged (N=%d, eps=%g): drift %.2e", N, eps, drift)
    report.meta["wall_ms"] = (time.perf_counter() - t0) * 1e3
    return report


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_sweep(config: RunConfig):
    """Run every (k, eps, N) combination in configured order.

    Returns ``(rows, failures)``; rows are dicts keyed by ``CSV_COLUMNS``.
    A failed entry produces a row with NaN errors and the sweep continues.
    """
    rows, failures = [], 0
    layout = config.resolved_layout()
    for k in config.k:
        for eps in config.eps:
            group = []
            for N in config.N:
                row = {"schema_version": SCHEMA_VERSION, "problem": config.problem,
                       "mesh": config.mesh, "layout": layout.value,
                       "family": FluxFamily(config.family).value, "k": k,
                       "sigma": config.sigma_for(k), "N": N, "eps": eps,
                       "quad": config.quad_err or k + 5, "rate_bal": None, "wall_ms": None}
                try:
                    rep = run_single(config, N, eps, k)
                except LayerMixedError as exc:
                    failures += 1
                    logger.error("run failed (k=%d, N=%d, eps=%g): %s", k, N, eps, exc)
                    row.update({c: math.nan for c in ("err_u", "err_flux", "err_div", "tnorm",
                                                      "tnorm_bal", "solve_residual")})
                else:
                    row.update(err_u=rep.err_u, err_flux=rep.err_flux, err_div=rep.err_div,
                               tnorm=rep.tnorm, tnorm_bal=rep.tnorm_bal,
                               solve_residual=rep.meta["solve_residual"])
                    if config.timing:
                        row["wall_ms"] = round(rep.meta["wall_ms"], 1)
                group.append(row)
            rates = convergence_rates([r["tnorm_bal"] for r in group], [r["N"] for r in group])
            for row, rate in zip(group, rates):
                row["rate_bal"] = rate
            rows.extend(group)
    return rows, failures


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def _read_rows(source):
    text = source
    if not (isinstance(source, str) and "\n" in source):
        text = Path(source).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or reader.fieldnames[:len(CSV_COLUMNS)] != CSV_COLUMNS:
        raise InvalidParameterError(f"malformed CSV header: {reader.fieldnames}")
    rows = list(reader)
    for lineno, row in enumerate(rows, 2):
        if None in row or any(v is None for v in row.values()):
            raise InvalidParameterError(f"malformed CSV row at line {lineno}")
    return rows


def render_table(source) -> str:
    """Fixed-width text table from CSV text or a CSV path.

    Errors use 4 significant digits (``5.867e-04``), rates 2 decimals;
    a missing rate renders blank.
    """
    rows = _read_rows(source)
    head = ["family", "k", "N", "eps", "|u-uh|", "|q-qh|", "|div(q-qh)|", "|||U-Uh|||",
            "|||U-Uh|||bal", "rate"]

    def sci(v):
        try:
            x = float(v)
        except ValueError:
            raise InvalidParameterError(f"non-numeric error value {v!r}") from None
        return "nan" if math.isnan(x) else f"{x:.3e}"

    def rate(v):
        return "" if v == "" else f"{float(v):.2f}"

    body = [[r["family"].upper(), r["k"], r["N"], f"{float(r['eps']):.0e}", sci(r["err_u"]),
             sci(r["err_flux"]), sci(r["err_div"]), sci(r["tnorm"]), sci(r["tnorm_bal"]),
             rate(r["rate_bal"])] for r in rows]
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(str(x).rjust(w) for x, w in zip(line, widths)).rstrip() for line in [head] + body]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)
