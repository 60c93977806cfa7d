"""Command-line wrapper: one figure per invocation, nonzero exit on bad input."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureSpec, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="recourse-figures",
        description="Render a recourse-costs experiment report CSV into a figure.",
    )
    parser.add_argument("--input", type=Path, required=True, help="experiment report CSV")
    parser.add_argument("--kind", choices=sorted(KINDS), required=True)
    parser.add_argument("--out", type=Path, required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(input_csv=args.input, kind=args.kind, output=args.out))
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
