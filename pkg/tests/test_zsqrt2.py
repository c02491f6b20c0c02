import math
from decimal import Decimal

import numpy as np
from hypothesis import given, strategies as st

from modelset import zsqrt2
from modelset.zsqrt2 import ZSqrt2

from oracles import model_set_1d, zval, zconj

ints = st.integers(-10**6, 10**6)


@given(ints, ints, ints, ints)
def test_ring_operations_match_floats(a, b, c, d):
    x, y = ZSqrt2(a, b), ZSqrt2(c, d)
    assert math.isclose(float(x * y), float(zval(a, b) * zval(c, d)), rel_tol=1e-9, abs_tol=1e-3)
    assert (x + y) - y == x
    assert (x * y).norm() == x.norm() * y.norm()


@given(ints, ints)
def test_sign_is_exact(a, b):
    s = ZSqrt2(a, b).sign()
    v = zval(a, b)
    assert s == (v > 0) - (v < 0)


@given(ints, ints, st.fractions(min_value=-1000, max_value=1000, max_denominator=1000))
def test_compare_rational(a, b, q):
    v = zval(a, b) - Decimal(q.numerator) / Decimal(q.denominator)
    assert zsqrt2.compare_rational(a, b, q) == (v > 0) - (v < 0)


def test_units_and_division():
    u = ZSqrt2(1, 1)
    assert u.is_unit() and (u * ZSqrt2(-1, 1)) == ZSqrt2(1, 0)
    assert ZSqrt2(2, 0).divides(ZSqrt2(4, 2))
    assert not ZSqrt2(2, 0).divides(ZSqrt2(3, 1))
    assert ZSqrt2(4, 2).exact_div(ZSqrt2(2, 0)) == ZSqrt2(2, 1)
    assert ZSqrt2(1, 1).conj() == ZSqrt2(1, -1)


def test_to_fraction_reads_decimal_literals():
    assert zsqrt2.to_fraction(0.8) == zsqrt2.Fraction(4, 5)


def test_enumerate_matches_oracle():
    got = zsqrt2.enumerate_1d(-50, 50, -0.8, 0.8)
    ref = model_set_1d(-50, 50, -0.8, 0.8)
    assert [tuple(r) for r in got.tolist()] == [(a, b) for _, a, b in ref]


def test_enumerate_closed_boundaries_exact():
    # 1 is the physical and internal part of (1, 0): closed window [-1, 1] keeps it
    got = zsqrt2.enumerate_1d(0, 3, -1, 1)
    assert [1, 0] in got.tolist()
    got = zsqrt2.enumerate_1d(0, 3, -0.999, 0.999)
    assert [1, 0] not in got.tolist()


def test_enumerate_sorted_by_value():
    got = zsqrt2.enumerate_1d(-20, 20, -3, 3)
    v = zsqrt2.to_float(got)
    assert np.all(np.diff(v) > 0)
    assert np.all(np.abs(zsqrt2.to_float_conj(got)) <= 3)
