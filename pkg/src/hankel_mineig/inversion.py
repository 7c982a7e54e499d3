"""First m columns of L^-1 and the top-left block of H^-1 = L^-T D^-1 L^-1.

L^-1 is produced in place by row-wise Gauss-Jordan elimination restricted to
the retained columns: at step ``i`` every lower row ``j`` negates its entry in
column ``i`` (when ``i < m``) and subtracts ``L[j][i]`` times the first
``min(i, m)`` entries of row ``i``. Products are exact and rounded back to K
fractional bits, once per update.

For the worker variant rows are redistributed with the same boustrophedon
assignment used for LDLT columns; the owner of row ``i`` broadcasts its first
``min(i, m)`` entries and every worker updates its own rows.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpz

from .fixedpoint import div_round, mantissa_to_double
from .ldlt import Broadcast, ColumnAssignment, LDLTFactors, _Abort, assign_columns


class SingularPivot(ZeroDivisionError):
    pass


@dataclass
class InversionStats:
    arith_s: float = 0.0
    comm_s: float = 0.0
    seconds: float = 0.0
    messages: int = 0
    max_message: int = 0


@dataclass
class RowDistributed:
    """Rows of L, each complete (``rows[j]`` has L[j][0..j-1]), spread over workers."""

    N: int
    frac_bits: int
    assignment: ColumnAssignment
    parts: dict  # worker -> {row index: list of mantissas}

    def row(self, j: int) -> list:
        return self.parts[self.assignment.owner[j]][j]


def transpose_redistribute(
    factors: LDLTFactors, assignment: ColumnAssignment | None = None
) -> RowDistributed:
    """Swap column ownership of L for row ownership; values are untouched."""
    N = factors.N
    if assignment is None:
        assignment = assign_columns(N, factors.assignment.workers)
    cols = factors.L_columns
    parts: dict = {w: {} for w in range(assignment.workers)}
    for j in range(N):
        parts[assignment.owner[j]][j] = [cols[i][j - i - 1] for i in range(j)]
    return RowDistributed(N, factors.frac_bits, assignment, parts)


def rows_to_columns(rows: RowDistributed) -> list[list]:
    """Inverse of :func:`transpose_redistribute` (column layout of L)."""
    N = rows.N
    return [[rows.row(j)[i] for j in range(i + 1, N)] for i in range(N)]


@dataclass
class PartialInverse:
    """``rows[j][c]`` is L^-1[j][c] for c < m, at ``frac_bits``."""

    N: int
    m: int
    frac_bits: int
    rows: list
    D: list
    stats: InversionStats = field(default_factory=InversionStats)

    def entry(self, j: int, c: int):
        return self.rows[j][c]


def _eliminate_row(row, f, src, n, K, half) -> None:
    scan1 = gmpy2.bit_scan1
    K1 = K - 1
    for c in range(n):
        p = f * src[c]
        q = (p + half) >> K
        if q & 1 and scan1(p) == K1:
            q -= 1
        row[c] -= q


def _finish_rows(N, m, K, work) -> list:
    one = mpz(1) << K
    out = []
    for j in range(N):
        r = work[j]
        row = [r[c] if c < j else (one if c == j else mpz(0)) for c in range(m)]
        out.append(row)
    return out


def invert_L_partial_serial(factors: LDLTFactors, m: int) -> PartialInverse:
    N, K = factors.N, factors.frac_bits
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={N}")
    t0 = time.perf_counter()
    cols = factors.L_columns
    A = [[cols[i][j - i - 1] for i in range(j)] for j in range(N)]
    half = mpz(1) << (K - 1)
    for i in range(N):
        n = min(m, i)
        src = A[i]
        for j in range(i + 1, N):
            row = A[j]
            f = row[i]
            if i < m:
                row[i] = -f
            _eliminate_row(row, f, src, n, K, half)
    dt = time.perf_counter() - t0
    stats = InversionStats(arith_s=dt, seconds=dt)
    return PartialInverse(N, m, K, _finish_rows(N, m, K, A), list(factors.D), stats)


def _inv_worker(me, dist, m, channel, stats, lock):
    N, K = dist.N, dist.frac_bits
    owner = dist.assignment.owner
    mine = sorted(dist.parts[me])
    rows = dist.parts[me]
    half = mpz(1) << (K - 1)
    arith = comm = 0.0
    try:
        for i in range(N):
            n = min(i, m)
            t = time.perf_counter()
            if owner[i] == me:
                channel.publish(i, rows[i][:n], ())
                src = rows[i]
            else:
                src = channel.receive(i)[0]
            t2 = time.perf_counter()
            comm += t2 - t
            for j in mine:
                if j <= i:
                    continue
                row = rows[j]
                f = row[i]
                if i < m:
                    row[i] = -f
                _eliminate_row(row, f, src, n, K, half)
            arith += time.perf_counter() - t2
    except _Abort:
        return
    except BaseException as exc:
        channel.fail(exc)
    finally:
        with lock:
            stats.arith_s = max(stats.arith_s, arith)
            stats.comm_s = max(stats.comm_s, comm)


def invert_L_partial_parallel(
    factors_or_rows: LDLTFactors | RowDistributed,
    assignment: ColumnAssignment | None = None,
    m: int = 8,
) -> PartialInverse:
    """Worker-distributed variant; bit-identical to the serial one.

    Accepts either the LDLT factors (redistributed here) or rows already
    produced by :func:`transpose_redistribute`. The row lists are consumed.
    """
    if isinstance(factors_or_rows, LDLTFactors):
        D = list(factors_or_rows.D)
        dist = transpose_redistribute(factors_or_rows, assignment)
    else:
        dist = factors_or_rows
        D = None
    N, K = dist.N, dist.frac_bits
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={N}")
    channel = Broadcast()
    stats = InversionStats()
    lock = threading.Lock()
    t0 = time.perf_counter()
    ts = [
        threading.Thread(target=_inv_worker, args=(w, dist, m, channel, stats, lock))
        for w in range(dist.assignment.workers)
    ]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    if channel.error is not None:
        raise channel.error
    stats.seconds = time.perf_counter() - t0
    stats.messages = channel.messages
    stats.max_message = max((min(i, m) for i in range(N)), default=0)
    work = [dist.row(j) for j in range(N)]
    return PartialInverse(N, m, K, _finish_rows(N, m, K, work), D, stats)


@dataclass(frozen=True)
class TruncatedInverse:
    """Top-left k x k block of H^-1 in binary64, plus its (k-1) x (k-1) corner."""

    k: int
    M: np.ndarray
    M_minus: np.ndarray
    seconds: float = 0.0


def assemble_truncated_inverse(Linv: PartialInverse, D: list | None, k: int) -> TruncatedInverse:
    """(H^-1)[a][b] = sum_l L^-1[l][a] L^-1[l][b] / D[l] for a, b < k.

    Each term is formed exactly and rounded once to K fractional bits; the
    sums are exact and cast to binary64 at the end.
    """
    D = Linv.D if D is None else D
    if not 1 <= k <= Linv.m:
        raise ValueError(f"need 1 <= k <= m={Linv.m}, got {k}")
    t0 = time.perf_counter()
    N, K, rows = Linv.N, Linv.frac_bits, Linv.rows
    sums = [[mpz(0)] * k for _ in range(k)]
    for l in range(N):
        d = D[l]
        if d == 0:
            raise SingularPivot(f"D[{l}] is zero")
        r = rows[l]
        top = min(l, k - 1)
        for a in range(top + 1):
            ra = r[a]
            if not ra:
                continue
            for b in range(a, top + 1):
                sums[a][b] += div_round(ra * r[b], d)
    M = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            M[a, b] = M[b, a] = mantissa_to_double(sums[a][b], K)
    dt = time.perf_counter() - t0
    return TruncatedInverse(k, M, M[: k - 1, : k - 1].copy(), dt)
