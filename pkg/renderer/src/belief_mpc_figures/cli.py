"""Command-line entry point: render one figure from a result directory."""

import argparse
import sys

from .figures import FIGURE_IDS, make_spec, render
from .io import SchemaError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from belief-mpc experiment CSVs.")
    parser.add_argument("--figure", required=True, choices=sorted(FIGURE_IDS),
                        help="which experiment's summary to plot")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="experiment output directory holding summary.csv")
    parser.add_argument("--out", required=True,
                        help="image file to write (extension picks the format)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report = render(make_spec(args.figure, args.in_dir, args.out))
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {report.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
