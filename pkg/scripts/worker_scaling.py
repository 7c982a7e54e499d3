#!/usr/bin/env python3
"""Wall and CPU time of one compute() per worker count.

Workers are threads sharing one interpreter, so on CPython the wall time
does not fall with more workers; the run still checks that the numbers are
identical and reports where the time goes.

    python scripts/worker_scaling.py --n 300 --bits 1024 --workers 1,2,4,8
"""
import argparse
import time

from hankel_mineig.moments import WeightSpec
from hankel_mineig.pipeline import compute


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--bits", type=int, default=1024)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--workers", default="1,2,4")
    ap.add_argument("--threads", type=int, default=1, help="step threads per worker")
    args = ap.parse_args()

    ref = None
    cols = ("workers", "wall_s", "cpu_s", "ldlt_s", "transpose_s", "invL_s", "invL_comm_s", "invH_s", "eigen_s")
    print(" ".join(f"{c:>11}" for c in cols))
    for w in (int(x) for x in args.workers.split(",")):
        cpu = time.process_time()
        rec = compute(args.n, WeightSpec(1, 2), args.bits, args.k, w, threads=args.threads)
        cpu = time.process_time() - cpu
        vals = [rec.wall_s, cpu, rec.ldlt_s, rec.transpose_s, rec.invL_s, rec.invL_comm_s, rec.invH_s, rec.eigen_s]
        print(f"{w:>11} " + " ".join(f"{v:>11.3f}" for v in vals))
        if ref is None:
            ref = rec.numeric_key()
        elif rec.numeric_key() != ref:
            raise SystemExit(f"workers={w} changed the eigenvalues")
    print(f"lambda = {ref[4]}")


if __name__ == "__main__":
    main()
