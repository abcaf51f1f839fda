"""torusviz: render figures from torusflow run directories.

Subcommands: portrait | torus3d | convergence, each taking --in (a
torusflow output directory) and --out (image path; both .png and .svg
are written at that basename).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import SchemaError
from .render import PLOT_KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torusviz", description=__doc__)
    sub = p.add_subparsers(dest="kind", required=True)
    for kind in PLOT_KINDS:
        sp = sub.add_parser(kind, help=f"render a {kind} figure")
        sp.add_argument("--in", dest="indir", required=True,
                        help="torusflow output directory")
        sp.add_argument("--out", required=True, help="output image path")
        sp.add_argument("--eps", type=float, default=None,
                        help="which census eps to draw (default: smallest found)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(sys.argv[1:] if argv is None else argv)
    job = PlotJob(indir=Path(args.indir), kind=args.kind,
                  out=Path(args.out), eps=args.eps)
    try:
        written = render(job)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
