"""Command-line entry point.

One subcommand per experiment, all driven by a TOML scenario file, plus a
plot command that renders a finished CSV.  Exit code 0 on success, 1 when
any point failed (suppressed by --keep-going), 2 on bad usage or config.
"""

from __future__ import annotations

import argparse
import sys

from cavityfarm import __version__
from cavityfarm.experiments import RUNNERS, ExperimentError, load_scenario


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="scenario TOML file")
    sub.add_argument("--out", default=None, help="output directory (default: scenario's out_dir)")
    sub.add_argument("--resume", action="store_true", help="skip points already in the manifest")
    sub.add_argument(
        "--workers",
        type=int,
        default=None,
        help="process pool size (default: CAVITYFARM_WORKERS or 1)",
    )
    sub.add_argument(
        "--keep-going",
        action="store_true",
        help="record point failures and finish instead of exiting nonzero",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityfarm",
        description="entanglement farming in a vibrating cavity: sweeps, drives and figures",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, blurb in (
        ("valley-sweep", "fixed-point entanglement against the flight factor grid"),
        ("vibration", "per-cycle observables under a sinusoidal length drive"),
        ("freq-response", "peak correlator response per vibration frequency"),
        ("gw", "farming through a strain-driven spring-mounted cavity"),
        ("audit", "size of the moving-wall corrections for the configured driver"),
    ):
        _add_run_flags(subs.add_parser(name, help=blurb))

    plot = subs.add_parser("plot", help="render a finished CSV to a figure")
    plot.add_argument("csv", help="CSV produced by one of the run commands")
    plot.add_argument(
        "--kind",
        required=True,
        choices=("valley", "vibration", "freq", "gw"),
        help="which schema/layout the CSV holds",
    )
    plot.add_argument("--out", required=True, help="output image path (.svg recommended)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "plot":
        from cavityfarm.plotting import render

        try:
            path = render(args.csv, args.kind, args.out)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(path)
        return 0

    try:
        scenario = load_scenario(args.config, out_dir=args.out)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        print(f"error: bad scenario config: {exc}", file=sys.stderr)
        return 2
    if scenario.kind != args.command:
        print(
            f"error: config declares kind {scenario.kind!r} but the "
            f"{args.command!r} command was invoked",
            file=sys.stderr,
        )
        return 2

    runner = RUNNERS[scenario.kind]
    try:
        path = runner(
            scenario,
            out_dir=args.out,
            resume=args.resume,
            workers=args.workers,
            keep_going=args.keep_going,
        )
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
