"""plot <kind> --in <csv> --out <img>

Renders one figure kind from a documented scqec CSV artifact and writes
it as both PNG and SVG next to the requested output path.  Exit codes:
0 success, 1 bad input (schema mismatch, missing file), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt

from .render import RENDERERS
from .schemas import SchemaError, read_rows


def render_to_files(kind: str, input_path: str | Path,
                    out: str | Path) -> list[Path]:
    schema_kind, renderer = RENDERERS[kind]
    rows = read_rows(input_path, schema_kind)
    fig = renderer(rows)
    base = Path(out)
    if base.suffix in (".png", ".svg"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix in (".png", ".svg"):
        target = base.with_suffix(suffix)
        fig.savefig(target)
        written.append(target)
    plt.close(fig)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scqec-plot",
        description="render figures from scqec run artifacts",
    )
    parser.add_argument("kind", choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="input", required=True,
                        help="input CSV (documented scqec schema)")
    parser.add_argument("--out", required=True,
                        help="output image path (PNG and SVG are written)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = render_to_files(args.kind, args.input, args.out)
    except (SchemaError, OSError) as e:
        print(f"{args.kind}: {e}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
