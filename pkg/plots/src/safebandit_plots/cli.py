"""Batch figure rendering for campaign outputs.

Usage:
    safebandit-plots --summary results/summary.csv --out figs/regret.png \
        [--sharpness results/sharpness_b1_inf.csv ...]

The regret figure goes to --out; when sharpness curves are given, their
overlay goes next to it as <stem>_sharpness<suffix>.
"""

import argparse
import sys
from pathlib import Path

from .render import PlotSpec, SchemaError, plot_regret, plot_sharpness


def build_parser():
    parser = argparse.ArgumentParser(
        prog="safebandit-plots",
        description="Render campaign summary and sharpness CSVs to figures")
    parser.add_argument("--summary", required=True,
                        help="campaign summary.csv path")
    parser.add_argument("--out", required=True,
                        help="output image path for the regret figure")
    parser.add_argument("--sharpness", nargs="*", default=[],
                        help="sharpness curve CSVs to overlay")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        out = plot_regret(PlotSpec(summary=args.summary, out=args.out))
        print(f"regret figure written to {out}")
        if args.sharpness:
            target = Path(args.out)
            sharp_out = target.with_name(
                f"{target.stem}_sharpness{target.suffix or '.png'}")
            out = plot_sharpness(PlotSpec(curves=tuple(args.sharpness),
                                          out=str(sharp_out)))
            print(f"sharpness figure written to {out}")
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
