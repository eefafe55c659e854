"""Command line front end: ``plots <figure-id> <csv...> -o <image>``."""

import argparse
import sys

from . import figures


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plots",
        description="render experiment figures from harness CSV output")
    parser.add_argument("figure", choices=figures.FIGURE_IDS,
                        help="which figure to draw")
    parser.add_argument("csv", nargs="+", help="input CSV file(s), pooled")
    parser.add_argument("-o", "--out", required=True,
                        help="output image path (.png or .svg)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        figures.render(args.csv, args.figure, args.out)
    except (OSError, figures.SchemaError) as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 1
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
