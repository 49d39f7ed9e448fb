"""Command line front-end.

Every sub-command writes a JSON (default) or text report to stdout or to
``--out``.  Exit status: 0 for clean results, 2 when a mathematical negative
is confirmed (a violation, an absent obstruction, an oracle disagreement),
1 for unusable input.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple
import argparse
import logging
import sys

from config.settings import ConfigError, RunConfig, load_config
from counterexample import build_model, cf_lower_bound_check, cf_two_by_two, verify_obstruction
from fundamental_ops import InconsistentDefectError, NotContractionError, fundamental_report
from operator_tuples import (
    NonCommutingError,
    OperatorTuple,
    gamma_isometry_check,
    gamma_unitary_check,
    pencil_positivity,
    von_neumann_sample,
)
from parsers.points import InputFormatError, load_json, load_points, parse_complex, parse_point, parse_z
from reports import (
    cert_text,
    export_membership_csv,
    fundamental_text,
    membership_text,
    obstruction_text,
    to_json,
)
from scalar_geometry import MEMBERSHIP_QUERIES, alpha_grid, classify, symmetrize

logger = logging.getLogger("symdisc")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NEGATIVE = 2

Result = Tuple[int, Any, str]


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or 'key = value' configuration file")
    common.add_argument("--input", dest="input_path", help="input file (points CSV/JSON or tuple JSON)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", dest="output", choices=["json", "text"], help="report format")
    common.add_argument("--seed", type=int, help="random seed (default from SYMDISC_SEED or 42)")
    common.add_argument("--abs-eps", dest="abs_eps", type=float)
    common.add_argument("--rel-eps", dest="rel_eps", type=float)
    common.add_argument("--band", type=float, help="boundary band for membership verdicts")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="symdisc", description="Numerics for the symmetrized polydisc"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("membership", "membership of points in the open or closed set"),
        ("boundary", "membership of points in the distinguished boundary"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--point", action="append", help="coordinates s1,...,s_{n-1},p")
        p.add_argument("--n", type=int, help="expected number of coordinates")
        if name == "membership":
            p.add_argument(
                "--query",
                choices=["open_g", "closed_gamma", "distinguished_boundary"],
                default="closed_gamma",
            )
        p.add_argument("--grid", action="store_true", help="also report pencil conditions on the alpha grid")
        p.add_argument("--alpha-radii", dest="alpha_radii", type=int)
        p.add_argument("--alpha-angles", dest="alpha_angles", type=int)
        p.add_argument("--csv-out", help="write a one-row-per-point CSV summary")

    p = sub.add_parser("symmetrize", parents=[common], help="symmetric coordinates of z")
    p.add_argument("--z", required=True, help="comma separated complex numbers")

    p = sub.add_parser("check-tuple", parents=[common], help="certify a commuting tuple")
    p.add_argument(
        "--require",
        choices=["contraction", "isometry", "unitary"],
        default="contraction",
        help="certificate whose failure gives exit status 2",
    )
    for flag, dest in (
        ("--degree", "degree"),
        ("--trials", "trials"),
        ("--torus-grid", "torus_grid"),
        ("--alpha-radii", "alpha_radii"),
        ("--alpha-angles", "alpha_angles"),
        ("--beta-grid", "beta_grid"),
        ("--max-torus-points", "max_torus_points"),
    ):
        p.add_argument(flag, dest=dest, type=int)

    p = sub.add_parser("fundamental", parents=[common], help="fundamental operators of a tuple")
    p.add_argument("--z-grid", dest="z_grid", type=int)

    p = sub.add_parser("counterexample", parents=[common], help="truncated obstruction model")
    p.add_argument("--n", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--eta", type=float)
    for flag, dest in (
        ("--degree", "degree"),
        ("--trials", "trials"),
        ("--torus-grid", "torus_grid"),
        ("--max-torus-points", "max_torus_points"),
    ):
        p.add_argument(flag, dest=dest, type=int)

    p = sub.add_parser("cf-check", parents=[common], help="two-by-two infimum device")
    p.add_argument("--b0", default="1")
    p.add_argument("--b1", default="1")
    p.add_argument("--degree", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--torus-grid", dest="torus_grid", type=int)
    p.add_argument("--slack", type=float, default=1e-6)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""

    config = RunConfig(command=args.command)
    if args.config:
        config = config.merged(load_config(Path(args.config)))
    names = set(RunConfig.__dataclass_fields__)
    flags = {k: v for k, v in vars(args).items() if k in names and k != "command"}
    return config.merged(flags).validate()


def _run_membership(args, config: RunConfig, query: str) -> Result:
    if config.input_path:
        points = load_points(Path(config.input_path))
    elif args.point:
        points = [parse_point(text, args.n) for text in args.point]
    else:
        raise InputFormatError("give --point or --input")
    grid = alpha_grid(config.alpha_radii, config.alpha_angles) if args.grid else None
    check = MEMBERSHIP_QUERIES[query]
    reports = [
        check(pt, tol=config.tolerance, band=config.band, grid=grid).to_dict() for pt in points
    ]
    if args.csv_out:
        export_membership_csv(reports, args.csv_out)
    status = EXIT_NEGATIVE if any(r["oracle_disagreement"] for r in reports) else EXIT_OK
    data: Any = reports[0] if len(reports) == 1 else {"reports": reports}
    text = "".join(membership_text(r) for r in reports)
    return status, data, text


def _run_symmetrize(args, config: RunConfig) -> Result:
    pt = symmetrize(parse_z(args.z))
    verdict = classify(pt, tol=config.tolerance, band=config.band)
    data = {"point": pt.to_dict(), "verdict": verdict.value}
    coords = ", ".join(f"{v.real:+.12g}{v.imag:+.12g}i" for v in pt.coordinates())
    return EXIT_OK, data, f"({coords}) {verdict.value}\n"


def _load_tuple(config: RunConfig) -> OperatorTuple:
    if not config.input_path:
        raise InputFormatError("give the tuple JSON with --input")
    data = load_json(Path(config.input_path))
    if not isinstance(data, dict):
        raise InputFormatError("tuple JSON must be an object")
    return OperatorTuple.from_dict(data, config.tolerance)


def _run_check_tuple(args, config: RunConfig) -> Result:
    t = _load_tuple(config)
    tol = config.tolerance
    certs = {
        "unitary": gamma_unitary_check(t, tol, config.band, config.seed),
        "isometry": gamma_isometry_check(t, tol, config.beta_grid, config.seed),
        "pencil": pencil_positivity(t, config.alpha_radii, config.alpha_angles, tol),
        "von_neumann": von_neumann_sample(
            t,
            config.degree,
            config.trials,
            config.torus_grid,
            config.seed,
            max_torus_points=config.max_torus_points,
        ),
    }
    required = {
        "unitary": ["unitary"],
        "isometry": ["isometry"],
        "contraction": ["pencil", "von_neumann"],
    }[args.require]
    failed = any(not certs[name].passed for name in required)
    data = {
        "n": t.n,
        "dim": t.dim,
        "commute_residual": t.commute_residual,
        "require": args.require,
        "certificates": {k: v.to_dict() for k, v in certs.items()},
        "tolerance": tol.to_dict(),
    }
    text = "".join(cert_text(name, c.to_dict()) for name, c in certs.items())
    return (EXIT_NEGATIVE if failed else EXIT_OK), data, text


def _run_fundamental(args, config: RunConfig) -> Result:
    t = _load_tuple(config)
    try:
        report = fundamental_report(t, config.tolerance, config.z_grid)
    except (NotContractionError, InconsistentDefectError) as exc:
        data = {"error": str(exc), "n": t.n, "dim": t.dim}
        return EXIT_NEGATIVE, data, f"no fundamental operators: {exc}\n"
    return EXIT_OK, report, fundamental_text(report)


def _run_counterexample(args, config: RunConfig) -> Result:
    model = build_model(config.n, config.depth, config.eta)
    report = verify_obstruction(
        model,
        vn_trials=config.trials,
        vn_degree=config.degree,
        torus_grid=config.torus_grid,
        seed=config.seed,
        max_torus_points=config.max_torus_points,
        tol=config.tolerance,
    ).to_dict()
    status = EXIT_OK if report["obstruction_confirmed"] else EXIT_NEGATIVE
    return status, report, obstruction_text(report)


def _run_cf_check(args, config: RunConfig) -> Result:
    b0, b1 = parse_complex(args.b0), parse_complex(args.b1)
    trials = config.trials
    gap = cf_lower_bound_check(b0, b1, trials, config.degree, config.torus_grid, config.seed)
    data = {
        "b0": [b0.real, b0.imag],
        "b1": [b1.real, b1.imag],
        "cf_norm": cf_two_by_two(b0, b1),
        "worst_gap": gap,
        "slack": args.slack,
        "trials": trials,
        "degree": config.degree,
        "torus_grid": config.torus_grid,
        "passed": gap >= -args.slack,
    }
    text = f"cf norm {data['cf_norm']:.12g}, worst sampled gap {gap:+.3e}\n"
    return (EXIT_OK if data["passed"] else EXIT_NEGATIVE), data, text


HANDLERS: Dict[str, Callable[[argparse.Namespace, RunConfig], Result]] = {
    "membership": lambda args, config: _run_membership(args, config, args.query),
    "boundary": lambda args, config: _run_membership(args, config, "distinguished_boundary"),
    "symmetrize": _run_symmetrize,
    "check-tuple": _run_check_tuple,
    "fundamental": _run_fundamental,
    "counterexample": _run_counterexample,
    "cf-check": _run_cf_check,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for command line usage; returns the exit status."""

    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        config = resolve_config(args)
        status, data, text = HANDLERS[args.command](args, config)
    except (ConfigError, InputFormatError, NonCommutingError, OSError, ValueError) as exc:
        print(f"symdisc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if config.output == "json":
        if isinstance(data, dict):
            # the destination is not part of the run
            echoed = {k: v for k, v in config.to_dict().items() if k != "out"}
            data = {**data, "config": echoed}
        output = to_json(data)
    else:
        output = text
    if config.out:
        Path(config.out).write_text(output)
    else:
        sys.stdout.write(output)
    return status


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    sys.exit(main())
