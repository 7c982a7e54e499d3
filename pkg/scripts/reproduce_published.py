#!/usr/bin/env python3
"""Recompute published beta = 1/2 rows and print the deviations.

    python scripts/reproduce_published.py --n-list 500,1000 --out runs.csv
    python scripts/reproduce_published.py --n-list 500 --bits 1024

Without --bits each N goes through the automatic precision search, which
costs two factorisations per step.
"""
import argparse
import logging

from hankel_mineig.cli import _n_list
from hankel_mineig.moments import WeightSpec
from hankel_mineig.pipeline import scan
from hankel_mineig.published import BY_N


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-list", default="500,1000")
    ap.add_argument("--bits", type=int, default=None, help="fixed K; default searches")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--out", default=None, help="scan CSV")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    recs = scan(_n_list(args.n_list), WeightSpec(1, 2), args.k, args.workers, bits=args.bits, out=args.out)
    print(f"{'N':>5} {'bits':>5} {'req':>5} {'lambda1':>22} {'|d1|':>9} {'|d2|':>9} {'|d3|':>9} {'wall_s':>8}")
    for r in recs:
        if r.error:
            print(f"{r.N:>5} failed: {r.error}")
            continue
        pub = BY_N.get(r.N)
        if pub is None:
            d = ["-"] * 3
            req = "-"
        else:
            d = [f"{abs(r.lambdas[i] - pub[2 + 2 * i]):.1e}" for i in range(3)]
            req = pub[1]
        print(f"{r.N:>5} {r.bits:>5} {req!s:>5} {r.lambda1!r:>22} {d[0]:>9} {d[1]:>9} {d[2]:>9} {r.wall_s:>8.1f}")


if __name__ == "__main__":
    main()
