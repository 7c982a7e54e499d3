"""Moments of w(x) = exp(-x**beta) on [0, inf) and their Hankel matrix.

    mu_k = (1/beta) * Gamma((k + 1) / beta)

Only weights with ``2/beta`` a positive integer are supported, so every Gamma
argument is an integer or a half-integer and the moments are either exact
rationals or rationals times sqrt(pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpz, isqrt

from .fixedpoint import FixScalar, div_round, from_fraction

GUARD_BITS = 64


@dataclass(frozen=True)
class WeightSpec:
    """beta = beta_num / beta_den, stored in lowest terms."""

    beta_num: int = 1
    beta_den: int = 2

    def __post_init__(self):
        if self.beta_num <= 0 or self.beta_den <= 0:
            raise ValueError("beta must be positive")
        g = math.gcd(self.beta_num, self.beta_den)
        object.__setattr__(self, "beta_num", self.beta_num // g)
        object.__setattr__(self, "beta_den", self.beta_den // g)
        if (2 * self.beta_den) % self.beta_num:
            raise ValueError(f"2/beta must be a positive integer, got beta={self.beta}")

    @property
    def beta(self) -> Fraction:
        return Fraction(self.beta_num, self.beta_den)

    @property
    def two_over_beta(self) -> int:
        return 2 * self.beta_den // self.beta_num

    def __str__(self):
        return f"{self.beta_num}/{self.beta_den}"


def _arctan_inv(x: int, one: int) -> int:
    # arctan(1/x) * one by the alternating Taylor series, integer arithmetic
    total = term = one // x
    x2 = x * x
    n, sign = 3, -1
    while term:
        term //= x2
        total += sign * (term // n)
        n += 2
        sign = -sign
    return total


@lru_cache(maxsize=32)
def pi_fixed(bits: int) -> mpz:
    """pi * 2**bits truncated to an integer, via Machin's formula with 32 guard bits."""
    extra = 32
    one = mpz(1) << (bits + extra)
    pi = 4 * (4 * _arctan_inv(5, one) - _arctan_inv(239, one))
    return pi >> extra


@lru_cache(maxsize=32)
def sqrt_pi_fixed(bits: int) -> mpz:
    """floor(sqrt(pi) * 2**bits) computed via an integer square root."""
    return isqrt(pi_fixed(2 * bits))


def gamma_exact(arg_times_2: int, frac_bits: int) -> FixScalar:
    """Gamma(arg_times_2 / 2) at ``frac_bits`` fractional bits.

    Integer arguments give ``(n-1)!`` exactly; half-integer arguments use
    Gamma(n + 1/2) = (2n)! sqrt(pi) / (4**n n!) with sqrt(pi) carried at
    ``frac_bits + 64`` bits before the final rounding.
    """
    if arg_times_2 < 1:
        raise ValueError("Gamma argument must be positive")
    if arg_times_2 % 2 == 0:
        return FixScalar(mpz(math.factorial(arg_times_2 // 2 - 1)) << frac_bits, frac_bits)
    return _half_integer_times(arg_times_2, Fraction(1), frac_bits)


def _half_integer_times(arg_times_2: int, scale: Fraction, frac_bits: int) -> FixScalar:
    # scale * Gamma(n + 1/2), rounded once at frac_bits
    n = (arg_times_2 - 1) // 2
    ratio = scale * Fraction(math.factorial(2 * n), 4**n * math.factorial(n))
    hi = frac_bits + GUARD_BITS
    num = mpz(ratio.numerator) * sqrt_pi_fixed(hi)
    den = mpz(ratio.denominator) << GUARD_BITS
    return FixScalar(div_round(num, den), frac_bits)


def moment(spec: WeightSpec, k: int, frac_bits: int) -> FixScalar:
    if k < 0:
        raise ValueError("moment index must be non-negative")
    arg2 = (k + 1) * spec.two_over_beta
    inv_beta = Fraction(spec.beta_den, spec.beta_num)
    if arg2 % 2 == 0:
        return from_fraction(inv_beta * math.factorial(arg2 // 2 - 1), frac_bits)
    return _half_integer_times(arg2, inv_beta, frac_bits)


def moment_exact(spec: WeightSpec, k: int) -> Fraction | None:
    """Exact rational moment, or None when it carries a sqrt(pi) factor."""
    arg2 = (k + 1) * spec.two_over_beta
    if arg2 % 2:
        return None
    return Fraction(spec.beta_den, spec.beta_num) * math.factorial(arg2 // 2 - 1)


@dataclass(frozen=True)
class MomentTable:
    spec: WeightSpec
    N: int
    frac_bits: int
    mu: tuple = field(repr=False)

    def entry(self, i: int, j: int) -> FixScalar:
        return self.mu[i + j]

    def columns(self, frac_bits: int | None = None) -> list[list]:
        """Column-major mantissas of H_N at ``frac_bits`` (default 2K)."""
        f = 2 * self.frac_bits if frac_bits is None else frac_bits
        if f < self.frac_bits:
            raise ValueError("columns can only widen the stored precision")
        shift = f - self.frac_bits
        m = [x.mantissa << shift for x in self.mu]
        return [[m[i + j] for j in range(self.N)] for i in range(self.N)]

    def as_fractions(self) -> list[list[Fraction]]:
        q = [x.as_fraction() for x in self.mu]
        return [[q[i + j] for j in range(self.N)] for i in range(self.N)]

    def as_floats(self) -> list[list[float]]:
        d = [float(x) for x in self.mu]
        return [[d[i + j] for j in range(self.N)] for i in range(self.N)]


def build_hankel(spec: WeightSpec, N: int, frac_bits: int) -> MomentTable:
    if N < 1:
        raise ValueError("matrix order must be at least 1")
    mu = tuple(moment(spec, k, frac_bits) for k in range(2 * N - 1))
    return MomentTable(spec, N, frac_bits, mu)


@dataclass(frozen=True)
class ConditionEstimate:
    log2_lambda_max: float
    log2_cond: float

    @property
    def lambda_max(self) -> float:
        return _pow2(self.log2_lambda_max)

    @property
    def cond(self) -> float:
        return _pow2(self.log2_cond)


def _pow2(x: float) -> float:
    try:
        return 2.0**x
    except OverflowError:
        return float("inf")


def condition_estimate(spec: WeightSpec, N: int, lambda_min: float = 0.1) -> ConditionEstimate:
    """Largest eigenvalue ~ largest diagonal moment; cond = that / lambda_min.

    ``lambda_min`` defaults to 1/10, the observed size of the smallest
    eigenvalue at beta = 1/2.
    """
    if N < 1:
        raise ValueError("matrix order must be at least 1")
    beta = float(spec.beta)
    ln_lam = -math.log(beta) + math.lgamma((2 * N - 1) / beta)
    log2_lam = ln_lam / math.log(2)
    return ConditionEstimate(log2_lam, log2_lam - math.log2(lambda_min))
