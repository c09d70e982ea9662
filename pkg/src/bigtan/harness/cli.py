"""Command-line entry point: ``bigtan verify | list-checks | show-point``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..bigtangent import projector_blocks, zeta_components
from ..errors import BigTanError, ConfigError
from ..finsler import FAMILIES, fundamental_data
from .checks import CHECKS, REGISTRY, SampleSpace
from .config import FORMATS, RunConfig, load_config, parse_tolerance
from .suite import emit_report, run_suite

EXIT_USAGE = 2


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--metric", choices=FAMILIES, help="metric family")
    p.add_argument("--dim", type=int, help="manifold dimension n (>= 2)")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--epsilon", type=float, help="conformal factor amplitude")
    p.add_argument("--b", help="Randers drift covector, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bigtan", description="Numerical checks of vertical big-tangent geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the check suite")
    _add_run_options(verify)
    verify.add_argument("--samples", type=int, help="samples per check")
    verify.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override the tolerance of one check (repeatable)")
    verify.add_argument("--only", help="comma separated check names")
    verify.add_argument("--report", help="write the report here instead of stdout")
    verify.add_argument("--format", choices=FORMATS, help="report format")

    sub.add_parser("list-checks", help="list registered checks")

    show = sub.add_parser("show-point", help="dump one sample point and its local quantities")
    _add_run_options(show)
    show.add_argument("--index", type=int, default=1, help="sample index (0 is the reference point)")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.metric is not None:
        if args.metric != cfg.family:
            cfg.b = ()
        cfg.family = args.metric
    for name in ("dim", "seed", "epsilon"):
        if getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.b is not None:
        try:
            cfg.b = tuple(float(v) for v in args.b.split(","))
        except ValueError as exc:
            raise ConfigError(f"--b must be comma separated numbers, got {args.b!r}") from exc
    if getattr(args, "samples", None) is not None:
        cfg.samples = args.samples
    for item in getattr(args, "tol", []):
        name, value = parse_tolerance(item)
        cfg.tolerances[name] = value
    if getattr(args, "only", None):
        cfg.only = [v.strip() for v in args.only.split(",") if v.strip()]
    if getattr(args, "report", None):
        cfg.report = args.report
    if getattr(args, "format", None):
        cfg.format = args.format
    return cfg.validate(REGISTRY)


def _listify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _listify(v) for k, v in obj.items()}
    return obj


def point_summary(cfg: RunConfig, index: int) -> dict:
    space = SampleSpace(cfg)
    pt = space.point(index)
    loc = space.connection(index).local(pt)
    m, cd = loc.metric, loc.cartan_data
    fd = fundamental_data(space.structure, pt.x, pt.y)
    zl, zu = zeta_components(m)
    return _listify({
        "family": cfg.family, "dim": cfg.dim, "seed": cfg.seed, "index": index,
        "x": pt.x, "y": pt.y, "p": pt.p,
        "F2": m.F2, "K2": m.K2, "norm_E": m.norm_E,
        "g": fd.g, "g_inv": fd.g_inv, "y_lower": fd.y_lower, "cartan": fd.cartan,
        "g_star": cd.g_star, "g_star_inv": cd.g_star_inv, "p_upper": cd.p_upper, "cartan_star": cd.cartan,
        "y_of_p": cd.solution.y_of_p, "newton_iterations": cd.solution.iterations,
        "newton_residual": cd.solution.residual, "newton_restarts": cd.solution.restarts,
        "zeta_lower": zl, "zeta_upper": zu,
        "projector_blocks": projector_blocks(m),
        "christoffel_y": loc.christoffel_y, "christoffel_p": loc.christoffel_p,
    })


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "list-checks":
            width = max(len(c.name) for c in CHECKS)
            for c in CHECKS:
                print(f"{c.name.ljust(width)}  {c.paper_ref}")
            return 0
        cfg = config_from_args(args)
        if args.command == "show-point":
            if args.index < 0:
                raise ConfigError("--index must be non-negative")
            print(json.dumps(point_summary(cfg, args.index), indent=2))
            return 0
        reports = run_suite(cfg)
        return emit_report(reports, cfg.format, cfg.report, cfg.echo())
    except ConfigError as exc:
        print(f"bigtan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bigtan: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BigTanError as exc:
        print(f"bigtan: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
