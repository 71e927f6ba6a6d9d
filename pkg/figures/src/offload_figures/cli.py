"""Script entry point: offload-figures --figure cost-vs-v --inputs 'runs/*' --out fig.png"""

from __future__ import annotations

import argparse
import sys

from . import FIGURE_IDS, FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offload-figures",
                                     description="render figures from run outputs")
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--inputs", required=True,
                        help="glob over run CSV/JSON outputs")
    parser.add_argument("--out", required=True, help="output image path (.png/.svg)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        image, companion = render(FigureSpec(figure=args.figure, inputs=args.inputs,
                                             out=args.out, title=args.title,
                                             dpi=args.dpi))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{image} + {companion}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
