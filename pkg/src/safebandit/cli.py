"""Command-line entry points.

Subcommands:
  run              run a campaign from a config file
  geometry         geometry report (K, diameter, max shrinkages) for a polytope file
  sharpness-curve  per-norm sharpness curve CSV for a polytope file
  smoke            tiny built-in campaign for a quick end-to-end check
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import campaign, geometry
from .errors import SafeBanditError


def _add_run_overrides(parser):
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="base seed (overrides config)")
    parser.add_argument("--mode", choices=["exact", "l1"],
                        help="optimistic selection mode")
    parser.add_argument("--schedule",
                        help="'theory' or 'override:N' exploration schedule")
    parser.add_argument("--trials", type=int, help="trials per safety set")


def _apply_overrides(config, args):
    updates = {}
    for key in ("out", "seed", "mode", "schedule", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    return replace(config, **updates) if updates else config


def build_parser():
    parser = argparse.ArgumentParser(
        prog="safebandit",
        description="Safe bandit optimization with constraint-set "
                    "sharpness geometry")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign from a config file")
    run.add_argument("--config", required=True, help="campaign config path")
    _add_run_overrides(run)

    geo = sub.add_parser("geometry", help="report geometry constants")
    geo.add_argument("poly", help="polytope file (text exchange format)")
    geo.add_argument("--out", help="directory to write the report into")
    geo.add_argument("--norms", default="1,2,inf",
                     help="comma list of norms, e.g. 1,2,inf")

    curve = sub.add_parser("sharpness-curve",
                           help="sharpness curve CSV for one norm")
    curve.add_argument("poly", help="polytope file")
    curve.add_argument("--norm", default="inf", help="norm label: 1, 2 or inf")
    curve.add_argument("--points", type=int, default=50)
    curve.add_argument("--out", help="output CSV path (default: stdout)")

    smoke = sub.add_parser("smoke", help="run the tiny built-in campaign")
    smoke.add_argument("--out", default="smoke-results")
    smoke.add_argument("--seed", type=int, default=20240)
    return parser


def _cmd_run(args):
    config = _apply_overrides(campaign.load_config(args.config), args)
    summary = campaign.run_campaign(config, progress=print)
    print(f"summary written to {summary.summary_path}")
    for result in summary.sets:
        print(f"  {result.name}: final mean exploitation regret "
              f"{result.final_mean_regret:.6g}, violations {result.violations}")
    return 0


def _cmd_geometry(args):
    poly = geometry.load_polytope(args.poly)
    norms = tuple(geometry.Norm.from_label(label)
                  for label in args.norms.split(","))
    report = campaign.geometry_report(poly, norms)
    text = campaign.render_report(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"geometry_{Path(args.poly).stem}.txt"
        target.write_text(text)
        print(f"report written to {target}")
    sys.stdout.write(text)
    return 0


def _cmd_curve(args):
    poly = geometry.load_polytope(args.poly)
    norm = geometry.Norm.from_label(args.norm)
    curve = geometry.sharpness_curve(poly, norm, args.points)
    if args.out:
        campaign.write_curve_csv(curve, args.out)
        print(f"curve written to {args.out}")
    else:
        sys.stdout.write("delta,sharpness\n")
        for delta, value in curve:
            sys.stdout.write(f"{delta!r},{value!r}\n")
    return 0


def _cmd_smoke(args):
    config = campaign.smoke_config(out=args.out, seed=args.seed)
    summary = campaign.run_campaign(config, progress=print)
    print(f"smoke campaign complete; summary at {summary.summary_path}")
    return 0


_COMMANDS = {"run": _cmd_run, "geometry": _cmd_geometry,
             "sharpness-curve": _cmd_curve, "smoke": _cmd_smoke}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SafeBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
