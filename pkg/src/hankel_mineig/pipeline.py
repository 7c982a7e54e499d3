"""End-to-end driver: moments -> LDLT -> row transpose -> partial L^-1 -> H^-1 block -> eigenvalues."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from .asymptotics import FitResult, fit_leading_exponent
from .eigen import NonPositiveBlockEigenvalue, smallest_eigs_of_H
from .inversion import assemble_truncated_inverse, invert_L_partial_parallel, transpose_redistribute
from .ldlt import PrecisionExhausted, assign_columns, decompose_parallel
from .moments import WeightSpec, build_hankel

log = logging.getLogger(__name__)

DEFAULT_K_BLOCK = 8
REPORTED_EIGS = 3
BITS_STEP = 1024
AGREEMENT_TOL = 1e-15
MAX_BITS = 16384

CSV_FIELDS = [
    "N", "beta", "bits", "k", "workers",
    "lambda1", "trunc1", "lambda2", "trunc2", "lambda3", "trunc3",
    "required_bits",
    "wall_s", "ldlt_s", "transpose_s", "invL_s", "invL_arith_s", "invL_comm_s", "invH_s", "eigen_s",
]  # fmt: skip


class NotConverged(RuntimeError):
    pass


class SchemaError(ValueError):
    pass


@dataclass
class RunRecord:
    N: int
    beta: str
    bits: int
    k: int
    workers: int
    lambdas: tuple = ()
    trunc: tuple = ()
    required_bits: int | None = None
    wall_s: float = 0.0
    ldlt_s: float = 0.0
    transpose_s: float = 0.0
    invL_s: float = 0.0
    invL_arith_s: float = 0.0
    invL_comm_s: float = 0.0
    invH_s: float = 0.0
    eigen_s: float = 0.0
    error: str | None = None

    @property
    def lambda1(self) -> float:
        return self.lambdas[0]

    def numeric_key(self) -> tuple:
        """Everything except timings, for determinism checks."""
        return (self.N, self.beta, self.bits, self.k, tuple(self.lambdas), tuple(self.trunc))

    def csv_row(self) -> dict:
        row = {
            "N": self.N, "beta": self.beta, "bits": self.bits, "k": self.k, "workers": self.workers,
            "required_bits": "" if self.required_bits is None else self.required_bits,
        }  # fmt: skip
        for i in range(REPORTED_EIGS):
            have = i < len(self.lambdas)
            row[f"lambda{i + 1}"] = repr(self.lambdas[i]) if have else ""
            row[f"trunc{i + 1}"] = repr(self.trunc[i]) if have else ""
        for name in CSV_FIELDS[12:]:
            row[name] = f"{getattr(self, name):.6f}"
        return row

    def to_json(self) -> dict:
        d = asdict(self)
        d["lambdas"] = list(self.lambdas)
        d["trunc"] = list(self.trunc)
        return d


def _beta_spec(beta) -> WeightSpec:
    if isinstance(beta, WeightSpec):
        return beta
    q = Fraction(beta).limit_denominator(1000)
    return WeightSpec(q.numerator, q.denominator)


def compute(
    N: int,
    beta=Fraction(1, 2),
    K: int = 1024,
    k: int = DEFAULT_K_BLOCK,
    workers: int = 1,
    *,
    s: int = REPORTED_EIGS,
    threads: int = 1,
) -> RunRecord:
    """Smallest eigenvalues of H_N at K fractional bits with a k x k inverse block.

    Raises :class:`PrecisionExhausted` when K is too small for N.
    """
    spec = _beta_spec(beta)
    if N < 1 or K < 1 or k < 1 or workers < 1:
        raise ValueError("N, K, k and workers must be positive")
    t_wall = time.perf_counter()
    H = build_hankel(spec, N, K)
    assignment = assign_columns(N, workers)

    t = time.perf_counter()
    factors = decompose_parallel(H, assignment, threads=threads)
    ldlt_s = time.perf_counter() - t
    D = factors.D

    t = time.perf_counter()
    rows = transpose_redistribute(factors)
    del factors
    transpose_s = time.perf_counter() - t

    kk = min(k, N)
    t = time.perf_counter()
    Linv = invert_L_partial_parallel(rows, m=kk)
    invL_s = time.perf_counter() - t
    del rows

    t = time.perf_counter()
    block = assemble_truncated_inverse(Linv, D, kk)
    invH_s = time.perf_counter() - t

    full = kk == N
    n_eigs = min(s, kk if full else kk - 1)
    t = time.perf_counter()
    if n_eigs < 1:
        raise ValueError(f"k={k} leaves no room for a truncation estimate; use k >= 2")
    try:
        res = smallest_eigs_of_H(block, n_eigs, full=full)
    except NonPositiveBlockEigenvalue as exc:
        raise PrecisionExhausted(-1, 2 * K) from exc
    eigen_s = time.perf_counter() - t

    return RunRecord(
        N=N,
        beta=str(spec),
        bits=K,
        k=kk,
        workers=workers,
        lambdas=tuple(float(x) for x in res.lambdas),
        trunc=tuple(float(x) for x in res.trunc_err),
        wall_s=time.perf_counter() - t_wall,
        ldlt_s=ldlt_s,
        transpose_s=transpose_s,
        invL_s=invL_s,
        invL_arith_s=Linv.stats.arith_s,
        invL_comm_s=Linv.stats.comm_s,
        invH_s=invH_s,
        eigen_s=eigen_s,
    )


def initial_bits(N: int) -> int:
    return BITS_STEP * max(1, math.ceil(N / 500))


def auto_precision(
    N: int,
    beta=Fraction(1, 2),
    k: int = DEFAULT_K_BLOCK,
    workers: int = 1,
    *,
    tol: float = AGREEMENT_TOL,
    max_bits: int = MAX_BITS,
    start_bits: int | None = None,
    runner: Callable[..., RunRecord] | None = None,
) -> tuple[int, RunRecord]:
    """Smallest multiple of 1024 bits whose lambda_1 agrees with the next step to ``tol``.

    Returns the required bits and the run at those bits (with
    ``required_bits`` set).
    """
    run = runner or compute
    K = start_bits or initial_bits(N)

    def attempt(bits):
        try:
            return run(N, beta, bits, k, workers)
        except PrecisionExhausted as exc:
            log.info("N=%d K=%d: %s", N, bits, exc)
            return None

    cur = attempt(K)
    while K + BITS_STEP <= max_bits:
        nxt = attempt(K + BITS_STEP)
        if cur is not None and nxt is not None and abs(cur.lambda1 - nxt.lambda1) <= tol:
            cur.required_bits = K
            return K, cur
        K += BITS_STEP
        cur = nxt
    raise NotConverged(f"N={N}: lambda_1 did not settle to {tol:g} below {max_bits} bits")


def scan(
    N_list: Iterable[int],
    beta=Fraction(1, 2),
    k: int = DEFAULT_K_BLOCK,
    workers: int = 1,
    *,
    bits: int | None = None,
    out: str | Path | io.TextIOBase | None = None,
    runner: Callable[..., RunRecord] | None = None,
    max_bits: int = MAX_BITS,
) -> list[RunRecord]:
    """One record per N, in the given order; ``bits=None`` means auto precision.

    Failures are logged and recorded as rows without eigenvalues.
    """
    run = runner or compute
    spec = _beta_spec(beta)
    records = []
    for N in N_list:
        try:
            if bits is None:
                _, rec = auto_precision(N, spec, k, workers, runner=run, max_bits=max_bits)
            else:
                rec = run(N, spec, bits, k, workers)
        except (PrecisionExhausted, NotConverged, ValueError) as exc:
            log.warning("N=%d failed: %s", N, exc)
            rec = RunRecord(N, str(spec), bits or 0, min(k, N), workers, error=str(exc))
        records.append(rec)
    if out is not None:
        write_csv(records, out)
    return records


def write_csv(records: Iterable[RunRecord], out) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_csv(records, fh)
        return
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS)
    w.writeheader()
    for rec in records:
        w.writerow(rec.csv_row())


def read_points(scan_csv) -> list[tuple[int, float]]:
    """(N, lambda_1) pairs from a scan CSV; rows without lambda_1 are skipped."""
    if isinstance(scan_csv, (str, Path)):
        with open(scan_csv, newline="") as fh:
            return read_points(fh)
    reader = csv.DictReader(scan_csv)
    missing = {"N", "lambda1"} - set(reader.fieldnames or ())
    if missing:
        raise SchemaError(f"scan CSV lacks column(s): {', '.join(sorted(missing))}")
    pts = []
    for line, row in enumerate(reader, start=2):
        if not row["lambda1"]:
            continue
        try:
            pts.append((int(row["N"]), float(row["lambda1"])))
        except ValueError as exc:
            raise SchemaError(f"line {line}: {exc}") from exc
    return pts


def plot_table(fit: FitResult) -> str:
    """Two whitespace-separated columns: x = log(4 pi N e), y = log((8 pi / lambda_1) sqrt(log N))."""
    lines = ["# x y"]
    lines += [f"{x:.16e} {y:.16e}" for x, y in zip(fit.x, fit.y)]
    return "\n".join(lines) + "\n"


def report(scan_csv, out_json=None, out_plot=None) -> FitResult:
    fit = fit_leading_exponent(read_points(scan_csv))
    if out_json is not None:
        Path(out_json).write_text(json.dumps(fit.to_dict(), indent=2) + "\n")
    if out_plot is not None:
        Path(out_plot).write_text(plot_table(fit))
    return fit
