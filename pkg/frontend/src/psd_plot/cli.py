"""psd-plot: render PNG figures from training artifacts.

Usage: psd-plot <kind> --in <artifact> --out <figure.png>
"""

from __future__ import annotations

import argparse
import sys

from .data import SchemaError
from .figures import KINDS

EXIT_SCHEMA = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="psd-plot",
        description="render figures from psd CSV/JSONL artifacts")
    p.add_argument("kind", choices=sorted(KINDS))
    p.add_argument("--in", dest="in_path", required=True,
                   help="input artifact (CSV or JSONL)")
    p.add_argument("--out", dest="out_path", required=True,
                   help="output PNG path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = KINDS[args.kind](args.in_path, args.out_path)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
