from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modelset.errors import ConfigError, UnsupportedWindowGeometry
from modelset.windows import BallWindow, BoxWindow, IntervalUnionWindow, window_from_dict


def test_box_basics():
    w = BoxWindow([0.8])
    assert w.measure() == pytest.approx(1.6)
    assert w.contains([[0.8], [-0.8], [0.81]]).tolist() == [True, True, False]
    assert w.intervals() == [(Fraction(-4, 5), Fraction(4, 5))]
    assert w.boundary_distance([[0.5]])[0] == pytest.approx(0.3)


@given(st.floats(-3, 3))
def test_box_overlap_is_interval_formula(s):
    w = BoxWindow([0.8])
    assert w.overlap([[s]])[0] == pytest.approx(max(0.0, 1.6 - abs(s)), abs=1e-15)


def test_ball_overlap_lens_2d():
    # two unit discs at distance 1: 2 acos(1/2) - sqrt(3)/2
    w = BallWindow([0.0, 0.0], 1.0)
    expect = 2 * np.arccos(0.5) - np.sqrt(3) / 2
    assert w.overlap([[1.0, 0.0]])[0] == pytest.approx(expect, rel=1e-12)
    assert w.overlap([[0.0, 0.0]])[0] == pytest.approx(np.pi, rel=1e-14)
    assert w.overlap([[2.0, 0.0]])[0] == 0.0


def test_ball_overlap_1d_is_interval():
    w = BallWindow([0.0], 0.8)
    assert w.overlap([[0.5]])[0] == pytest.approx(1.1, rel=1e-12)


def test_interval_union():
    w = IntervalUnionWindow([(1, 2), (-1, 0)])
    assert w.measure() == pytest.approx(2.0)
    # W ∩ (W - 1) = [0,0]∪... : [-1,0]∩[0,1] has length 0, [-1,0]∩[-1,0]... shift by 1 maps [1,2] onto [0,1]
    assert w.overlap([[1.0]])[0] == pytest.approx(0.0)
    assert w.overlap([[2.0]])[0] == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        IntervalUnionWindow([(0, 2), (1, 3)])


def test_measure_equals_self_overlap():
    for w in (BoxWindow([0.8, 0.3]), BallWindow([0.0, 1.0, 2.0], 0.7), IntervalUnionWindow([(0, 0.3), (0.5, 1.2)])):
        assert w.overlap(np.zeros((1, w.m)))[0] == w.measure()


def test_empty_and_aperiodic():
    assert BoxWindow([0.0]).is_empty()
    assert not BoxWindow([0.0]).is_aperiodic()
    assert BoxWindow([0.8]).is_aperiodic()


def test_from_dict():
    assert window_from_dict({"kind": "ball", "center": [0], "radius": 1}).measure() == pytest.approx(2)
    with pytest.raises(ConfigError):
        window_from_dict({"kind": "hexagon"})
    with pytest.raises(ConfigError):
        window_from_dict({"kind": "box", "half_widths": [1, 1]}, m=1)
    with pytest.raises(UnsupportedWindowGeometry):
        BoxWindow([1, 1]).intervals()
