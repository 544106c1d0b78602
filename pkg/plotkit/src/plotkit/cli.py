"""Standalone figure scripts: plotkit <figure> --in <dir> --out <dir>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import figures
from .figures import FigureSpec
from .schema import SchemaError

FIGURES = {
    "solutions": figures.plot_solutions,
    "heatmap": figures.plot_heatmap,
    "coverage": figures.plot_coverage,
    "sweep": figures.plot_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from simulator output files."
    )
    parser.add_argument("figure", choices=sorted(FIGURES) + ["all"])
    parser.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="image directory")
    parser.add_argument("--scenario", default=None, help="scenario JSON for geometry overlays")
    parser.add_argument("--level", type=int, default=None, help="recursion level to draw")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        in_dir=Path(args.in_dir),
        out_dir=Path(args.out_dir),
        scenario=Path(args.scenario) if args.scenario else None,
        level=args.level,
        dpi=args.dpi,
    )
    names = sorted(FIGURES) if args.figure == "all" else [args.figure]
    try:
        for name in names:
            out = FIGURES[name](spec)
            print(f"wrote {out}")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
