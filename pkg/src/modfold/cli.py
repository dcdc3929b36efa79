"""Command line: ``modfold <kind> --config <path> [--out <dir>] [--seed <u64>] [--dry-run]``.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .exceptions import InfeasibleError, ModfoldError, NumericalError, UsageError
from .experiments import KINDS, load_config, plan, render_plotdata, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="modfold", description="Folded sampling experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=_seed, default=None, help="override the config seed")
        p.add_argument("--dry-run", action="store_true", help="validate the config and list the stages")
    p = sub.add_parser("plotdata", help="convert a result CSV to plot data")
    p.add_argument("csv")
    p.add_argument("--out", default=None, help="output path (default: <csv>.plot.json)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plotdata":
            print(render_plotdata(args.csv, args.out))
            return EXIT_OK
        cfg = load_config(args.config, kind=args.command, seed=args.seed)
        if args.dry_run:
            print(json.dumps(cfg.to_dict(), sort_keys=True))
            for i, stage in enumerate(plan(cfg), 1):
                print(f"stage {i}: {stage}")
            return EXIT_OK
        manifest = run(cfg, args.out)
        for f in manifest.outputs:
            print(f)
        return EXIT_OK
    except UsageError as exc:
        print(f"modfold: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, InfeasibleError, ModfoldError) as exc:
        print(f"modfold: numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
