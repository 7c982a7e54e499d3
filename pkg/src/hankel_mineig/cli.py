"""Command-line entry point: ``hankel-mineig {compute,scan,fit}``.

Exit codes: 0 success, 2 precision exhausted / not converged, 3 bad input.
The default worker count comes from ``HANKEL_MINEIG_WORKERS``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from .asymptotics import DegenerateFit
from .ldlt import PrecisionExhausted
from .moments import WeightSpec
from .pipeline import (
    DEFAULT_K_BLOCK,
    MAX_BITS,
    NotConverged,
    SchemaError,
    auto_precision,
    compute,
    plot_table,
    report,
    scan,
    write_csv,
)

EXIT_OK = 0
EXIT_PRECISION = 2
EXIT_INPUT = 3

WORKERS_ENV = "HANKEL_MINEIG_WORKERS"


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _n_list(text: str) -> list[int]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hankel-mineig", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--beta-num", type=int, default=1)
        sp.add_argument("--beta-den", type=int, default=2)
        sp.add_argument("--k", type=int, default=DEFAULT_K_BLOCK, help="inverse block size")
        sp.add_argument("--workers", type=int, default=_default_workers())
        sp.add_argument("--max-bits", type=int, default=MAX_BITS)

    c = sub.add_parser("compute", help="smallest eigenvalues for one N")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--bits", type=int, default=None, help="fractional bits K (default: auto search)")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    common(c)

    s = sub.add_parser("scan", help="one run per N, written as CSV")
    s.add_argument("--n-list", required=True, help="e.g. 100,200 or 2..8")
    s.add_argument("--auto-precision", action="store_true")
    s.add_argument("--bits", type=int, default=1024)
    s.add_argument("--out", default="-")
    common(s)

    f = sub.add_parser("fit", help="leading-exponent fit of a scan CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--out", default="-", help="fit report JSON")
    f.add_argument("--plot", default=None, help="two-column x y table")
    return p


def _spec(args) -> WeightSpec:
    return WeightSpec(args.beta_num, args.beta_den)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "compute":
            spec = _spec(args)
            if args.bits is None:
                _, rec = auto_precision(args.n, spec, args.k, args.workers, max_bits=args.max_bits)
            else:
                rec = compute(args.n, spec, args.bits, args.k, args.workers)
            if args.format == "json":
                print(json.dumps(rec.to_json(), indent=2))
            else:
                write_csv([rec], sys.stdout)
        elif args.command == "scan":
            spec = _spec(args)
            bits = None if args.auto_precision else args.bits
            out = sys.stdout if args.out == "-" else args.out
            scan(_n_list(args.n_list), spec, args.k, args.workers, bits=bits, out=out, max_bits=args.max_bits)
        else:
            fit = report(args.input, None if args.out == "-" else args.out, args.plot)
            if args.out == "-":
                print(json.dumps(fit.to_dict(), indent=2))
            if args.plot is None and args.out != "-":
                sys.stdout.write(plot_table(fit))
    except (PrecisionExhausted, NotConverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (SchemaError, DegenerateFit, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
