"""Command-line entry point.

Subcommands: beamform | place | coverage | sweep-power | sample-users | verify.
Exit codes: 0 success, 2 parse error, 3 validation error, 4 solver failure,
1 any other failure (including verify mismatches).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import NonFiniteObjective, ParseError, ValidationError
from .geom import Point2
from . import commands
from .scenario import load_scenario

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


def _point_arg(text: str) -> Point2:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected 'x,y'") from exc
    return Point2(x, y)


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risplace",
        description="Plan the placement of a reflecting surface in a blocked cell.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes for the placement search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beamform", parents=[common], help="solve one instance at a fixed RIS")
    p.add_argument("--ris", type=_point_arg, required=True, help="RIS position 'x,y'")
    p.add_argument(
        "--users",
        default=None,
        help="explicit user positions 'x1,y1;x2,y2;...' (default: sample the model)",
    )
    p.add_argument("--max-iters", type=int, default=None)

    sub.add_parser("place", parents=[common], help="run the full placement pipeline")

    p = sub.add_parser("coverage", parents=[common], help="line-of-sight coverage grid")
    p.add_argument("--ris", type=_point_arg, default=None, help="optional RIS position 'x,y'")

    p = sub.add_parser("sweep-power", parents=[common], help="rate vs transmit power")
    p.add_argument("--pmax-list", type=_float_list, required=True, help="dBm values 'p1,p2,...'")
    p.add_argument(
        "--modes",
        default="optimal,random,none",
        help="comma-separated subset of optimal,random,none",
    )
    p.add_argument("--placement", default=None, help="final_region.json of a prior place run")
    p.add_argument("--draws", type=int, default=None, help="user draws per point")

    sub.add_parser("sample-users", parents=[common], help="draw one user instantiation")

    sub.add_parser("verify", parents=[common], help="recompute artifact values in --out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn = load_scenario(args.scenario)
        if args.seed is not None:
            scn = scn.with_seed(args.seed)
        out = Path(args.out)
        if args.command == "beamform":
            users = None
            if args.users:
                users = [_point_arg(tok) for tok in args.users.split(";") if tok]
            commands.cmd_beamform(scn, args.ris, out, users=users, max_iters=args.max_iters)
        elif args.command == "place":
            commands.cmd_place(scn, out, threads=args.threads)
        elif args.command == "coverage":
            commands.cmd_coverage(scn, out, ris=args.ris)
        elif args.command == "sweep-power":
            modes = [m for m in args.modes.split(",") if m]
            commands.cmd_sweep_power(
                scn,
                out,
                args.pmax_list,
                modes=modes,
                placement_path=args.placement,
                n_draws=args.draws,
            )
        elif args.command == "sample-users":
            commands.cmd_sample_users(scn, out)
        elif args.command == "verify":
            if commands.cmd_verify(scn, out):
                return EXIT_FAILURE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonFiniteObjective as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
