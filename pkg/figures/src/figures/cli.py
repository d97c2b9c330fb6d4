"""Command-line entry point: figures --experiment fig2 --in results_blackwell.csv
--in results_bias.csv --out fig2.png"""

from __future__ import annotations

import argparse
import sys

from .data import EXPERIMENT_TABLES, SchemaMismatch
from .render import FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures")
    parser.add_argument("--experiment", choices=tuple(EXPERIMENT_TABLES), required=True)
    parser.add_argument(
        "--in",
        dest="inputs",
        action="append",
        required=True,
        help="input campaign CSV (repeat for experiments with two tables)",
    )
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        spec = FigureSpec(
            input_csv_paths=tuple(args.inputs),
            figure=args.experiment,
            output_image_path=args.out,
        )
        render(spec)
    except (SchemaMismatch, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
