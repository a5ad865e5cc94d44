"""figs: render figures from pairpop CSVs.

    figs render --spec figure.json

Exit codes: 0 ok, 2 bad spec or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from pairpop_figs.render import FigureSpec, SchemaMismatch, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render")
    rend.add_argument("--spec", required=True)
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        image, sidecar = render(spec)
    except (SchemaMismatch, OSError, KeyError, ValueError) as exc:
        print(f"render failed: {exc}", file=sys.stderr)
        return 2
    print(image)
    print(sidecar)
    return 0


if __name__ == "__main__":
    sys.exit(main())
