"""Batch figure rendering: tomoplots <reports...> --out-dir DIR.

Inputs are grouped by their declared report kind; each kind becomes one
figure (PNG + SVG) named after it in the output directory.  Exit code 0 on
success, 2 for usage errors, 1 for runtime failures.
"""

import argparse
import os
import sys

from .figures import FigureSpec, render
from .reader import KINDS, read_report


def main(argv=None):
    parser = argparse.ArgumentParser(prog="tomoplots", description=__doc__)
    parser.add_argument("inputs", nargs="+", help="report CSV files")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--dim", type=int, default=None,
                        help="require all reports to have this dimension")
    args = parser.parse_args(argv)

    try:
        by_kind = {}
        for path in args.inputs:
            kind = read_report(path).kind
            if kind not in KINDS:
                raise ValueError(f"{path}: cannot plot a {kind} report")
            by_kind.setdefault(kind, []).append(path)
        os.makedirs(args.out_dir, exist_ok=True)
        for kind in KINDS:
            if kind not in by_kind:
                continue
            spec = FigureSpec(inputs=tuple(by_kind[kind]), kind=kind,
                              out_base=os.path.join(args.out_dir, kind), dim=args.dim)
            for written in render(spec):
                print(f"wrote {written}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
