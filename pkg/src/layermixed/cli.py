"""Command-line entry point: ``layermixed run`` and ``layermixed render``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import InvalidParameterError, LayerMixedError
from .harness import RunConfig, render_table, rows_to_csv, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layermixed",
                                description="Mixed FEM for singularly perturbed reaction-diffusion on layer-adapted meshes")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single case or an (N, eps, k) sweep")
    run.add_argument("--config", help="flat key=value file; flags override its entries")
    run.add_argument("--problem", help="corner-layer | corner-layer-c1 | polynomial")
    run.add_argument("--mesh", help="bakhvalov-s | shishkin")
    run.add_argument("--layout", help="left-only | two-sided (default from problem)")
    run.add_argument("--family", help="rt | bdm")
    run.add_argument("--k", help="degree or comma list")
    run.add_argument("--sigma", help="transition exponent (default k+3/2 RT, k+1 BDM)")
    run.add_argument("--N", help="cells per direction, comma list")
    run.add_argument("--eps", help="perturbation parameter(s), comma list")
    run.add_argument("--quad", help="assembly Gauss points per direction")
    run.add_argument("--quad-err", help="error-norm Gauss points per direction")
    run.add_argument("--solver", help="condensed | lu | gmres")
    run.add_argument("--quad-check", help="re-check error quadrature with 2 more points (true/false)")
    run.add_argument("--timing", action="store_const", const="true", help="fill the wall_ms column")
    run.add_argument("--out", help="CSV output path (default: CSV to stdout)")
    run.add_argument("--dump-mesh", help="write the 1D mesh points here")
    run.add_argument("--dump-matrix", help="write the system matrix (Matrix Market) here")

    render = sub.add_parser("render", help="render a results CSV as a text table")
    render.add_argument("csv")
    return p


def _run(args) -> int:
    keys = ("problem", "mesh", "layout", "family", "k", "sigma", "N", "eps", "quad", "quad_err",
            "solver", "quad_check", "timing", "out", "dump_mesh", "dump_matrix")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.config:
        config = RunConfig.from_file(args.config, overrides)
    else:
        config = RunConfig.from_mapping(overrides)
    rows, failures = run_sweep(config)
    text = rows_to_csv(rows)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
        print(render_table(text))
    else:
        sys.stdout.write(text)
    return EXIT_NUMERIC if failures else EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "render":
            print(render_table(args.csv))
            return EXIT_OK
        return _run(args)
    except (InvalidParameterError, OSError) as exc:
        print(f"layermixed: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LayerMixedError as exc:
        print(f"layermixed: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
