"""Command line entry: plot <kind> <log.csv> [log2.csv] -o out.png"""

import argparse
import sys

from .figures import FIGURE_KINDS, PlotSpec, render
from .schema import SchemaMismatch


def make_parser():
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("kind", choices=sorted(FIGURE_KINDS))
    parser.add_argument("logs", nargs="+", help="input CSV log(s); compare takes two")
    parser.add_argument("-o", "--output", required=True, help="output image (png/svg/pdf)")
    parser.add_argument("--title", default="")
    parser.add_argument("--dpi", type=int, default=120)
    parser.add_argument("--label", action="append", default=[],
                        help="series label (repeat for compare)")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        spec = PlotSpec(inputs=args.logs, kind=args.kind, output=args.output,
                        title=args.title, dpi=args.dpi, labels=args.label)
        out = render(spec)
    except (SchemaMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
