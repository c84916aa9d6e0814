"""Command-line entry point: one positional CSV path plus output flags."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddkit-plot",
        description="Render log-log fidelity-loss figures from ddkit scan CSV tables.",
    )
    parser.add_argument("csv", help="scan table in the published 11-column schema")
    parser.add_argument("--out", default="fidelity_loss.png", help="output image path")
    parser.add_argument(
        "--families",
        help="comma-separated families to draw (default: all present)",
    )
    parser.add_argument(
        "--no-envelope",
        action="store_true",
        help="draw the envelope family without its shaded spread band",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    families = tuple(args.families.split(",")) if args.families else None
    spec = PlotSpec(
        csv_path=args.csv,
        out_path=args.out,
        families=families,
        envelope=not args.no_envelope,
    )
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"schema error ({exc.column}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
