"""Exact arithmetic in the ring Z[sqrt 2].

Elements are stored as integer pairs ``(a, b)`` meaning ``a + b*sqrt(2)``.
The Galois conjugation ``a + b*sqrt(2) -> a - b*sqrt(2)`` is the star map of
the Z[sqrt 2] cut-and-project scheme.

Besides the scalar :class:`ZSqrt2` type there are vectorised helpers working
on integer numpy arrays, which the enumerators use for bulk exact checks.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

import numpy as np

SQRT2 = math.sqrt(2.0)

# int64 squares stay exact below this magnitude
_INT64_SAFE = 2**31


def to_fraction(x) -> Fraction:
    """Rational value of a user supplied number (``0.8`` -> ``4/5``)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def sign_pair(a: int, b: int) -> int:
    """Sign of ``a + b*sqrt(2)`` for integers a, b."""
    if a >= 0 and b >= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b <= 0:
        return -1
    # opposite signs: compare a^2 with 2 b^2
    if a > 0:
        return 1 if a * a > 2 * b * b else -1
    return 1 if 2 * b * b > a * a else -1


def compare_rational(a: int, b: int, q) -> int:
    """Sign of ``a + b*sqrt(2) - q`` for a rational q."""
    q = to_fraction(q)
    return sign_pair(a * q.denominator - q.numerator, b * q.denominator)


@total_ordering
class ZSqrt2:
    __slots__ = ("a", "b")

    def __init__(self, a: int = 0, b: int = 0):
        self.a = int(a)
        self.b = int(b)

    def __repr__(self):
        return f"ZSqrt2({self.a}, {self.b})"

    def __str__(self):
        return f"{self.a}{self.b:+d}√2"

    def __hash__(self):
        return hash((self.a, self.b))

    def _coerce(self, other):
        if isinstance(other, ZSqrt2):
            return other
        if isinstance(other, int):
            return ZSqrt2(other, 0)
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __lt__(self, other):
        if isinstance(other, (float, Fraction)):
            return compare_rational(self.a, self.b, other) < 0
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return sign_pair(self.a - other.a, self.b - other.b) < 0

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ZSqrt2(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return ZSqrt2(-self.a, -self.b)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ZSqrt2(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ZSqrt2(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def conj(self) -> ZSqrt2:
        return ZSqrt2(self.a, -self.b)

    def norm(self) -> int:
        return self.a * self.a - 2 * self.b * self.b

    def sign(self) -> int:
        return sign_pair(self.a, self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return self.a + self.b * SQRT2

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def divides(self, other: ZSqrt2) -> bool:
        n = self.norm()
        if n == 0:
            return False
        num = other * self.conj()
        return num.a % n == 0 and num.b % n == 0

    def exact_div(self, other: ZSqrt2) -> ZSqrt2:
        """``self / other``; raises ValueError if the quotient is not in Z[sqrt 2]."""
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[sqrt 2]")
        num = self * other.conj()
        if num.a % n or num.b % n:
            raise ValueError(f"{self} is not divisible by {other}")
        return ZSqrt2(num.a // n, num.b // n)


# ---------------------------------------------------------------------------
# vectorised helpers (arrays of shape (..., 2) or separate a/b arrays)


def _as_safe(*arrays):
    if any(arr.size and np.abs(arr).max() >= _INT64_SAFE for arr in arrays):
        return [arr.astype(object) for arr in arrays]
    return [arr.astype(np.int64) for arr in arrays]


def sign_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise exact sign of ``a + b*sqrt(2)``."""
    a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
    a, b = _as_safe(a, b)
    lhs = a * a
    rhs = 2 * b * b
    sa = np.sign(a).astype(np.int64)
    sb = np.sign(b).astype(np.int64)
    mixed = np.where(lhs > rhs, sa, np.where(lhs < rhs, sb, 0)).astype(np.int64)
    same = np.where(sa != 0, sa, sb)
    return np.where(sa * sb >= 0, same, mixed).astype(np.int64)


def compare_rational_array(a, b, q) -> np.ndarray:
    """Elementwise sign of ``a + b*sqrt(2) - q`` for a rational scalar q."""
    q = to_fraction(q)
    a = np.asarray(a)
    b = np.asarray(b)
    if max(abs(q.numerator), q.denominator) >= _INT64_SAFE:
        a = a.astype(object)
        b = b.astype(object)
    return sign_array(a * q.denominator - q.numerator, b * q.denominator)


def in_interval(a, b, lo, hi) -> np.ndarray:
    """Exact test ``lo <= a + b*sqrt(2) <= hi`` with rational bounds."""
    return (compare_rational_array(a, b, lo) >= 0) & (compare_rational_array(a, b, hi) <= 0)


def mul_pairs(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of arrays of pairs (last axis = (a, b))."""
    a = x[..., 0] * y[..., 0] + 2 * x[..., 1] * y[..., 1]
    b = x[..., 0] * y[..., 1] + x[..., 1] * y[..., 0]
    return np.stack([a, b], axis=-1)


def to_float(x: np.ndarray) -> np.ndarray:
    """Physical embedding of an array of pairs."""
    return x[..., 0] + x[..., 1] * SQRT2


def to_float_conj(x: np.ndarray) -> np.ndarray:
    """Internal (conjugate) embedding of an array of pairs."""
    return x[..., 0] - x[..., 1] * SQRT2


def conj_pairs(x: np.ndarray) -> np.ndarray:
    out = np.array(x, copy=True)
    out[..., 1] = -out[..., 1]
    return out


def enumerate_1d(phys_lo, phys_hi, int_lo, int_hi, exact: bool = True) -> np.ndarray:
    """All ``(a, b)`` with ``a+b√2`` in [phys_lo, phys_hi] and ``a-b√2`` in [int_lo, int_hi].

    With ``exact=True`` the bounds are read as rationals and membership is
    decided exactly; otherwise the float bounds are used with a small outward
    margin (the caller filters afterwards). Returns an int64 array of shape
    (n, 2) sorted by physical value.
    """
    # a = (x + y)/2, b = (x - y)/(2√2) with x physical, y internal
    b_lo = math.floor((float(phys_lo) - float(int_hi)) / (2 * SQRT2) - 1e-9)
    b_hi = math.ceil((float(phys_hi) - float(int_lo)) / (2 * SQRT2) + 1e-9)
    if b_hi < b_lo:
        return np.zeros((0, 2), dtype=np.int64)
    b = np.arange(b_lo, b_hi + 1, dtype=np.int64)
    bs = b * SQRT2
    lo = np.maximum(float(phys_lo) - bs, float(int_lo) + bs)
    hi = np.minimum(float(phys_hi) - bs, float(int_hi) + bs)
    a_lo = np.floor(lo - 1e-9).astype(np.int64)
    a_hi = np.ceil(hi + 1e-9).astype(np.int64)
    count = np.maximum(a_hi - a_lo + 1, 0)
    keep = count > 0
    b, a_lo, count = b[keep], a_lo[keep], count[keep]
    if count.sum() == 0:
        return np.zeros((0, 2), dtype=np.int64)
    bb = np.repeat(b, count)
    offsets = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    aa = np.repeat(a_lo, count) + offsets
    if exact:
        mask = in_interval(aa, bb, phys_lo, phys_hi) & in_interval(aa, -bb, int_lo, int_hi)
    else:
        x = aa + bb * SQRT2
        y = aa - bb * SQRT2
        eps = 1e-9
        mask = (x >= phys_lo - eps) & (x <= phys_hi + eps) & (y >= int_lo - eps) & (y <= int_hi + eps)
    out = np.stack([aa[mask], bb[mask]], axis=-1).astype(np.int64)
    order = np.argsort(to_float(out), kind="stable")
    return out[order]
