"""Eigenvalues of the small truncated inverse block.

The largest eigenvalues of the top-left k x k block of H^-1 converge to the
largest eigenvalues of H^-1, i.e. to the reciprocals of the smallest
eigenvalues of H. Comparing the k and k-1 blocks estimates the truncation
error.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .inversion import TruncatedInverse

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class JacobiNotConverged(RuntimeError):
    pass


class NonPositiveBlockEigenvalue(ArithmeticError):
    pass


def _off_norm(A: np.ndarray) -> float:
    # summed directly: ||A||^2 - ||diag||^2 cancels to ~sqrt(eps) noise
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def symmetric_eigen(M, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||M||_F``.
    """
    A = np.array(M, dtype=float, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix must be exactly symmetric")
    if n == 0:
        return np.empty(0)
    target = tol * np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= target:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    # theta would overflow; t ~ 1/(2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
    off = _off_norm(A)
    if off <= target:
        return np.sort(np.diag(A))
    raise JacobiNotConverged(f"off-diagonal norm {off:.3e} after {max_sweeps} sweeps")


@dataclass
class SmallestEigResult:
    lambdas: list
    trunc_err: list
    k_used: int
    block_eigs: np.ndarray = field(repr=False, default=None)
    seconds: float = 0.0


def smallest_eigs_of_H(block: TruncatedInverse, s: int = 3, full: bool = False) -> SmallestEigResult:
    """Smallest ``s`` eigenvalues of H from the block's largest eigenvalues.

    ``full`` marks a block that is the whole of H^-1 (k == N): there is no
    truncation, so the error estimates are zero and ``s`` may equal k.
    """
    t0 = time.perf_counter()
    k = block.k
    limit = k if full else k - 1
    if not 1 <= s <= limit:
        raise ValueError(f"s must be in [1, {limit}] for k={k}")
    mu = symmetric_eigen(block.M)
    if mu[-s] <= 0:
        raise NonPositiveBlockEigenvalue(
            f"block eigenvalue {mu[-s]!r} <= 0; truncation too aggressive or K too small"
        )
    lam = [1.0 / mu[k - 1 - i] for i in range(s)]
    if full:
        err = [0.0] * s
    else:
        mu_m = symmetric_eigen(block.M_minus)
        err = [lam[i] - 1.0 / mu_m[k - 2 - i] for i in range(s)]
    return SmallestEigResult(lam, err, k, mu, time.perf_counter() - t0)
