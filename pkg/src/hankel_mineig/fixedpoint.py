"""Signed fixed-point numbers with an arbitrary-precision integer mantissa.

A value is ``mantissa / 2**frac_bits``. Additive operations are exact and
require matching ``frac_bits``; products are exact with the fractional bits
summed; only :func:`div` and :func:`truncate` round (to nearest, ties to even).

The matrix kernels work on bare mantissas for speed and use
:func:`round_shift` and :func:`div_round` directly; :class:`FixScalar` is the
checked, self-describing form used at module boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import gmpy2
from gmpy2 import mpz

__all__ = [
    "FixScalar",
    "FracBitsMismatch",
    "from_integer",
    "from_fraction",
    "add",
    "sub",
    "mul",
    "div",
    "truncate",
    "to_double",
    "round_shift",
    "div_round",
    "mantissa_to_double",
]


class FracBitsMismatch(ValueError):
    """Additive operation on operands with different fractional-bit counts."""


def round_shift(m, shift: int):
    """Return ``m / 2**shift`` rounded to the nearest integer, ties to even."""
    if shift <= 0:
        return m << -shift
    q = (m + (mpz(1) << (shift - 1))) >> shift
    # (m + half) >> shift rounds ties up; a tie that landed on an odd q goes back down
    if q & 1 and gmpy2.bit_scan1(mpz(m)) == shift - 1:
        q -= 1
    return q


def div_round(num, den):
    """Integer quotient ``num / den`` rounded to nearest, ties to even."""
    if den == 0:
        raise ZeroDivisionError("fixed-point division by zero")
    if den < 0:
        num, den = -num, -den
    q, r = divmod(num, den)  # floor division, 0 <= r < den
    twice = r << 1
    if twice > den or (twice == den and q & 1):
        q += 1
    return q


def mantissa_to_double(m, frac_bits: int) -> float:
    """Nearest binary64 to ``m / 2**frac_bits``; +-inf when out of range."""
    try:
        return int(m) / (1 << frac_bits) if frac_bits >= 0 else float(int(m) << -frac_bits)
    except OverflowError:
        return float("inf") if m > 0 else float("-inf")


@total_ordering
@dataclass(frozen=True, eq=False)
class FixScalar:
    mantissa: mpz
    frac_bits: int

    def __post_init__(self):
        if self.frac_bits < 0:
            raise ValueError(f"frac_bits must be non-negative, got {self.frac_bits}")
        if not isinstance(self.mantissa, type(mpz(0))):
            object.__setattr__(self, "mantissa", mpz(self.mantissa))

    def as_fraction(self) -> Fraction:
        return Fraction(int(self.mantissa), 1 << self.frac_bits)

    def align(self, frac_bits: int) -> FixScalar:
        """Exact re-expression at a larger fractional-bit count."""
        if frac_bits < self.frac_bits:
            raise ValueError("align only widens; use truncate to narrow")
        return FixScalar(self.mantissa << (frac_bits - self.frac_bits), frac_bits)

    def _aligned(self, other: FixScalar):
        f = max(self.frac_bits, other.frac_bits)
        return (self.mantissa << (f - self.frac_bits), other.mantissa << (f - other.frac_bits))

    def __eq__(self, other):
        if not isinstance(other, FixScalar):
            return NotImplemented
        a, b = self._aligned(other)
        return a == b

    def __lt__(self, other):
        if not isinstance(other, FixScalar):
            return NotImplemented
        a, b = self._aligned(other)
        return a < b

    def __hash__(self):
        return hash(self.as_fraction())

    def __neg__(self):
        return FixScalar(-self.mantissa, self.frac_bits)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __float__(self):
        return to_double(self)

    def __repr__(self):
        return f"FixScalar({to_double(self)!r} @F={self.frac_bits})"


def from_integer(n: int, frac_bits: int) -> FixScalar:
    if frac_bits < 0:
        raise ValueError("frac_bits must be non-negative")
    return FixScalar(mpz(n) << frac_bits, frac_bits)


def from_fraction(x: Fraction | int, frac_bits: int) -> FixScalar:
    """Nearest fixed-point value to an exact rational (ties to even)."""
    x = Fraction(x)
    return FixScalar(div_round(mpz(x.numerator) << frac_bits, mpz(x.denominator)), frac_bits)


def _check_frac(a: FixScalar, b: FixScalar):
    if a.frac_bits != b.frac_bits:
        raise FracBitsMismatch(f"frac_bits differ: {a.frac_bits} vs {b.frac_bits}")


def add(a: FixScalar, b: FixScalar) -> FixScalar:
    _check_frac(a, b)
    return FixScalar(a.mantissa + b.mantissa, a.frac_bits)


def sub(a: FixScalar, b: FixScalar) -> FixScalar:
    _check_frac(a, b)
    return FixScalar(a.mantissa - b.mantissa, a.frac_bits)


def mul(a: FixScalar, b: FixScalar) -> FixScalar:
    return FixScalar(a.mantissa * b.mantissa, a.frac_bits + b.frac_bits)


def div(a: FixScalar, b: FixScalar, out_frac_bits: int) -> FixScalar:
    """``a / b`` rounded to ``out_frac_bits`` fractional bits.

    Raises ZeroDivisionError for ``b == 0``; upstream this means a pivot
    collapsed, i.e. the working precision ran out.
    """
    if out_frac_bits < 0:
        raise ValueError("out_frac_bits must be non-negative")
    # a/b * 2^F = (ma * 2^(F + fb - fa)) / mb
    shift = out_frac_bits + b.frac_bits - a.frac_bits
    if shift >= 0:
        num, den = a.mantissa << shift, b.mantissa
    else:
        num, den = a.mantissa, b.mantissa << -shift
    return FixScalar(div_round(num, den), out_frac_bits)


def truncate(a: FixScalar, new_frac_bits: int) -> FixScalar:
    if not 0 <= new_frac_bits <= a.frac_bits:
        raise ValueError(f"cannot truncate {a.frac_bits} fractional bits to {new_frac_bits}")
    return FixScalar(round_shift(a.mantissa, a.frac_bits - new_frac_bits), new_frac_bits)


def to_double(a: FixScalar) -> float:
    return mantissa_to_double(a.mantissa, a.frac_bits)
