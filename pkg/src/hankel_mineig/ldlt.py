"""Square-root-free Cholesky (H = L D L^T) in fixed point, without pivoting.

Elimination runs on bare integer mantissas at ``2K`` fractional bits. Column
``i`` is divided by its pivot once to give ``B_i`` (one rounding per entry),
then every entry right of it is updated with

    A_j[k] -= round(A_i[j] * B_i[k])        i < j <= k

(the product is exact, one rounding back to 2K per update). ``D`` and ``L``
are rounded to ``K`` fractional bits at the end.

The worker variant distributes columns over in-process workers in a
boustrophedon ("balanced round robin") order. The owner of column ``i+1``
finishes it first, publishes it together with a prefix of ``B_{i+1}``, and only
then applies step ``i`` to its remaining columns; the other workers recompute
whatever part of ``B_{i+1}`` was not published. Every mantissa goes through
the same operations in the same order as in the serial kernel, so the results
are bit-identical for any worker count.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpz

from .fixedpoint import FixScalar, div_round, round_shift
from .moments import MomentTable

B_CHUNK_VALUES = 100
B_MIN_MULTIPLICATIONS = 8000
# local multiplications assumed to finish while one B chunk is in flight
B_MULTS_PER_CHUNK = 100


class PrecisionExhausted(ArithmeticError):
    """A pivot came out non-positive: K is too small for this matrix."""

    def __init__(self, column: int, frac_bits: int):
        super().__init__(
            f"non-positive pivot at column {column} with {frac_bits} working fractional bits; "
            "increase K"
        )
        self.column = column
        self.frac_bits = frac_bits


@dataclass(frozen=True)
class ColumnAssignment:
    N: int
    workers: int
    owner: tuple  # 0-based worker index per column

    def owned(self, worker: int) -> list[int]:
        return [c for c, w in enumerate(self.owner) if w == worker]

    def counts(self) -> list[int]:
        out = [0] * self.workers
        for w in self.owner:
            out[w] += 1
        return out


def assign_columns(N: int, workers: int) -> ColumnAssignment:
    """Columns 0..n-1 go to workers 0..n-1, the next n to n-1..0, and so on."""
    if N < 1 or workers < 1:
        raise ValueError("N and workers must be positive")
    owner = []
    for c in range(N):
        sweep, pos = divmod(c, workers)
        owner.append(pos if sweep % 2 == 0 else workers - 1 - pos)
    return ColumnAssignment(N, workers, tuple(owner))


def chunk_size(loop_iterations: int, threads: int) -> int:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return max(5, loop_iterations // (200 * threads))


def broadcast_policy(
    column_length: int,
    remaining_multiplications: int,
    chunk_values: int = B_CHUNK_VALUES,
    min_multiplications: int = B_MIN_MULTIPLICATIONS,
    mults_per_chunk: int = B_MULTS_PER_CHUNK,
) -> int:
    """Number of leading B entries the column owner publishes.

    B is cut into chunks of ``chunk_values``; chunks are sent while at least
    ``min_multiplications`` local multiplications are still outstanding.
    Each chunk in flight is charged ``mults_per_chunk`` of that work.
    """
    sent = 0
    remaining = remaining_multiplications
    while sent < column_length and remaining >= min_multiplications:
        sent = min(sent + chunk_values, column_length)
        remaining -= mults_per_chunk
    return sent


@dataclass
class LDLTStats:
    updates: int = 0
    b_published: int = 0
    b_recomputed: int = 0
    messages: int = 0
    seconds: float = 0.0


@dataclass
class LDLTFactors:
    """``D[i]`` and the strictly-lower part of column ``i`` of L, at K bits.

    ``L_columns[i][r]`` is ``L[i + 1 + r][i]``. ``B_columns`` holds the same
    columns at the 2K working precision when the decomposition was asked to
    keep them.
    """

    N: int
    frac_bits: int
    D: list
    L_columns: list
    assignment: ColumnAssignment
    B_columns: list | None = None
    stats: LDLTStats = field(default_factory=LDLTStats)

    def L(self, j: int, i: int):
        """Mantissa of L[j][i] (unit diagonal, zero above)."""
        if j == i:
            return mpz(1) << self.frac_bits
        if j < i:
            return mpz(0)
        return self.L_columns[i][j - i - 1]

    def D_scalar(self, i: int) -> FixScalar:
        return FixScalar(self.D[i], self.frac_bits)

    def L_scalar(self, j: int, i: int) -> FixScalar:
        return FixScalar(self.L(j, i), self.frac_bits)

    def worker_columns(self, worker: int) -> dict[int, list]:
        return {i: self.L_columns[i] for i in self.assignment.owned(worker)}


def _update_column(col, a, b, start: int, stop: int, F: int, half) -> None:
    # col[k] -= round(a * b[k]) for k in [start, stop), ties to even
    scan1 = gmpy2.bit_scan1
    F1 = F - 1
    for k in range(start, stop):
        p = a * b[k]
        q = (p + half) >> F
        if q & 1 and scan1(p) == F1:
            q -= 1
        col[k] -= q


def _divide_column(col, pivot, start: int, stop: int, F: int, out: list) -> None:
    for k in range(start, stop):
        out[k] = div_round(col[k] << F, pivot)


class _StepRunner:
    """Applies one elimination step to a set of columns.

    With ``threads > 1`` the flattened (j, k) index space is cut into blocks
    of :func:`chunk_size` and handed out last-block-first from a shared
    queue; values do not depend on this.
    """

    def __init__(self, N: int, F: int, threads: int = 1):
        self.N = N
        self.F = F
        self.half = mpz(1) << (F - 1)
        self.threads = threads
        self.pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def apply(self, cols: dict, ai, b, targets) -> int:
        N, F, half = self.N, self.F, self.half
        if self.pool is None:
            n = 0
            for j in targets:
                _update_column(cols[j], ai[j], b, j, N, F, half)
                n += N - j
            return n
        total = sum(N - j for j in targets)
        size = chunk_size(total, self.threads)
        blocks = []
        for j in targets:
            for k0 in range(j, N, size):
                blocks.append((j, k0, min(k0 + size, N)))
        blocks.reverse()
        list(self.pool.map(lambda blk: _update_column(cols[blk[0]], ai[blk[0]], b, blk[1], blk[2], F, half), blocks))
        return total


def decompose_serial(
    H: MomentTable, *, threads: int = 1, keep_working: bool = False
) -> LDLTFactors:
    N, K = H.N, H.frac_bits
    F = 2 * K
    A = H.columns(F)
    stats = LDLTStats()
    t0 = time.perf_counter()
    runner = _StepRunner(N, F, threads)
    D = []
    B_cols = []
    try:
        for i in range(N):
            ai = A[i]
            pivot = ai[i]
            if pivot <= 0:
                raise PrecisionExhausted(i, F)
            b = [None] * N
            _divide_column(ai, pivot, i + 1, N, F, b)
            stats.updates += runner.apply(A, ai, b, range(i + 1, N))
            D.append(pivot)
            B_cols.append(b[i + 1 :])
            A[i] = None
    finally:
        runner.close()
    stats.seconds = time.perf_counter() - t0
    return _finish(N, K, D, B_cols, assign_columns(N, 1), stats, keep_working)


def _finish(N, K, D, B_cols, assignment, stats, keep_working) -> LDLTFactors:
    D_k = [round_shift(d, K) for d in D]
    L_k = [[round_shift(x, K) for x in col] for col in B_cols]
    return LDLTFactors(
        N, K, D_k, L_k, assignment, B_columns=B_cols if keep_working else None, stats=stats
    )


class _Abort(Exception):
    pass


class Broadcast:
    """One-to-all channel carrying (A_{i+1}, B-prefix) per iteration.

    ``publish`` happens-before every ``receive`` of the same iteration. A
    failure on any worker is re-raised in all waiting workers.
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._msgs: dict[int, tuple] = {}
        self._error: BaseException | None = None
        self.messages = 0
        self.values_sent = 0

    def publish(self, key: int, column, b_prefix) -> None:
        with self._cond:
            self._msgs[key] = (column, b_prefix)
            self.messages += 1
            self.values_sent += len(column) + len(b_prefix)
            self._cond.notify_all()

    def receive(self, key: int):
        with self._cond:
            while key not in self._msgs:
                if self._error is not None:
                    raise _Abort()
                self._cond.wait()
            return self._msgs[key]

    def discard(self, key: int) -> None:
        with self._cond:
            self._msgs.pop(key, None)

    def fail(self, exc: BaseException) -> None:
        with self._cond:
            if self._error is None:
                self._error = exc
            self._cond.notify_all()

    @property
    def error(self):
        return self._error


def _worker(me, H, assignment, channel, out, stats_lock, stats, threads, policy):
    N = H.N
    F = 2 * H.frac_bits
    owner = assignment.owner
    mine = assignment.owned(me)
    mine_set = set(mine)
    # every worker builds its own columns from the shared moments
    mu = [x.mantissa << (F - H.frac_bits) for x in H.mu]
    cols = {j: [mu[j + r] for r in range(N)] for j in mine}
    runner = _StepRunner(N, F, threads)
    updates = published = recomputed = 0
    try:
        # iteration 0: everyone has column 0 and computes B_0 in full
        ai = cols[0] if 0 in mine_set else [mu[r] for r in range(N)]
        if ai[0] <= 0:
            raise PrecisionExhausted(0, F)
        b = [None] * N
        _divide_column(ai, ai[0], 1, N, F, b)
        for i in range(N):
            if i in mine_set:
                out[i] = (ai[i], b[i + 1 :])
            nxt = i + 1
            if nxt < N and owner[nxt] == me:
                col = cols[nxt]
                _update_column(col, ai[nxt], b, nxt, N, F, runner.half)
                updates += N - nxt
                pivot = col[nxt]
                if pivot <= 0:
                    raise PrecisionExhausted(nxt, F)
                nb = [None] * N
                _divide_column(col, pivot, nxt + 1, N, F, nb)
                rest = [j for j in mine if j > nxt]
                remaining = sum(N - j for j in rest)
                prefix = policy(N - nxt - 1, remaining)
                channel.publish(nxt, col, nb[nxt + 1 : nxt + 1 + prefix])
                published += prefix
                updates += runner.apply(cols, ai, b, rest)
                ai, b = col, nb
            else:
                rest = [j for j in mine if j > i]
                updates += runner.apply(cols, ai, b, rest)
                if nxt >= N:
                    break
                col, prefix_vals = channel.receive(nxt)
                pivot = col[nxt]
                if pivot <= 0:
                    raise PrecisionExhausted(nxt, F)
                nb = [None] * N
                start = nxt + 1
                nb[start : start + len(prefix_vals)] = prefix_vals
                _divide_column(col, pivot, start + len(prefix_vals), N, F, nb)
                recomputed += N - start - len(prefix_vals)
                ai, b = col, nb
    except _Abort:
        return
    except BaseException as exc:
        channel.fail(exc)
        return
    finally:
        runner.close()
        with stats_lock:
            stats.updates += updates
            stats.b_published += published
            stats.b_recomputed += recomputed


def decompose_parallel(
    H: MomentTable,
    assignment: ColumnAssignment | None = None,
    workers: int | None = None,
    *,
    threads: int = 1,
    keep_working: bool = False,
    policy=broadcast_policy,
) -> LDLTFactors:
    """Worker-distributed factorisation; bit-identical to :func:`decompose_serial`."""
    N, K = H.N, H.frac_bits
    if assignment is None:
        assignment = assign_columns(N, workers or 1)
    if assignment.N != N:
        raise ValueError("assignment does not match matrix order")
    channel = Broadcast()
    out: list = [None] * N
    stats = LDLTStats()
    lock = threading.Lock()
    t0 = time.perf_counter()
    ts = [
        threading.Thread(
            target=_worker,
            args=(w, H, assignment, channel, out, lock, stats, threads, policy),
            name=f"ldlt-worker-{w}",
        )
        for w in range(assignment.workers)
    ]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    if channel.error is not None:
        raise channel.error
    stats.messages = channel.messages
    stats.seconds = time.perf_counter() - t0
    D = [o[0] for o in out]
    B_cols = [o[1] for o in out]
    return _finish(N, K, D, B_cols, assignment, stats, keep_working)
