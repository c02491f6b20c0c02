import math
from decimal import Decimal

import numpy as np
import pytest

from modelset.autocorr import (
    AtomicMeasure,
    TestFunction,
    compare_autocorrelation,
    convolution_star,
    density_bound_trace,
    isolating_tents,
    positive_definiteness_gram,
    sigma_t,
    sl2_gap_function,
    sl2_sigma_ratio,
    theoretical_autocorrelation,
)
from modelset.errors import ConfigError
from modelset.groups import AveragingSequence, HeisenbergModelSet, SL2ModelSet
from modelset.patch import LatticeSet

from oracles import interval_overlap, zconj, zval

BOX = AveragingSequence("box", 1)
S2 = math.sqrt(2)
DENSITY = 1.6 / (2 * S2)


@pytest.fixture(scope="module")
def measure(zscheme, fib):
    return theoretical_autocorrelation(zscheme, fib.window, 20.0)


def test_sigma_identity_tent(fib):
    tr = sigma_t(fib, BOX, TestFunction("tent", 0.0, 0.4), [100.0, 1e4])
    # only self pairs: sigma = count / (2t)
    assert tr.values == pytest.approx(tr.counts / (2 * tr.t_grid), rel=1e-14)
    assert tr.counts[-1] == 11313
    assert tr.values[-1] == pytest.approx(DENSITY, rel=0.01)
    assert np.all(np.diff(tr.volumes) > 0) and np.all(np.diff(tr.counts) >= 0)


def test_sigma_zero_function(fib):
    tr = sigma_t(fib, BOX, TestFunction("tent", 0.0, 0.4, amplitude=0.0), [10.0, 100.0])
    assert np.all(tr.values == 0)


def test_sigma_matches_atom_weight(fib, measure):
    z = 1 + S2
    f = TestFunction("tent", z, 0.4)
    emp = sigma_t(fib, BOX, f, [1e4]).values[0]
    assert abs(emp - measure(f)) / measure(f) <= 0.05


def test_theoretical_examples(measure):
    assert measure.weight_at([0.0]) == DENSITY
    assert measure.weight_at([1 + S2]) == pytest.approx((1.6 - (S2 - 1)) / (2 * S2), rel=1e-12)
    assert measure.weight_at([1 + S2]) == pytest.approx(0.41924, abs=1e-5)
    ex = measure.exact.reshape(-1, 2)
    conj = ex[:, 0] - ex[:, 1] * S2
    assert np.all(np.abs(conj) < 1.6)


def test_theoretical_weights_vs_oracle(zscheme, fib):
    m = theoretical_autocorrelation(zscheme, fib.window, 10.0)
    ref = {}
    for a in range(-40, 41):
        for b in range(-40, 41):
            x = zval(a, b)
            if abs(x) <= 10:
                w = interval_overlap(zconj(a, b), 0.8) / (2 * Decimal(2).sqrt())
                if w > 0:
                    ref[(a, b)] = w
    got = {tuple(e): w for e, w in zip(m.exact.reshape(-1, 2).tolist(), m.weights)}
    assert set(got) == set(ref)
    for k, w in got.items():
        assert w == pytest.approx(float(ref[k]), rel=1e-12)


def test_atom_bounds_symmetry_truncation(zscheme, fib, measure):
    w0 = measure.weight_at([0.0])
    assert np.all(measure.weights > 0) and np.all(measure.weights <= w0)
    for z, w in zip(measure.locations, measure.weights):
        assert measure.weight_at(-z) == w
    small = theoretical_autocorrelation(zscheme, fib.window, 7.0)
    for z, w in zip(small.locations, small.weights):
        assert measure.weight_at(z) == w


def test_cutoff_zero_single_atom(zscheme, fib):
    m = theoretical_autocorrelation(zscheme, fib.window, 0.0)
    assert len(m) == 1 and m.weights[0] == DENSITY
    with pytest.raises(ConfigError):
        theoretical_autocorrelation(zscheme, fib.window, -1.0)


def test_isolating_tents(measure):
    tents = isolating_tents(measure, 10)
    assert len(tents) == 10
    for f in tents:
        assert measure(f) == pytest.approx(measure.weight_at(f.center), rel=1e-12)


def test_convolution_tent_norm():
    f = TestFunction("tent", 0.0, 0.5)
    # ||tent||_2^2 = 2 w / 3
    assert convolution_star(f, f, [0.0]) == pytest.approx(1 / 3, abs=1e-10)
    assert convolution_star(f, f, [1.5]) == 0.0
    g = TestFunction("tent", 1.0, 0.5)
    assert convolution_star(f, g, [1.0]) == pytest.approx(1 / 3, abs=1e-10)


def test_gram_examples(measure):
    f = TestFunction("tent", 0.0, 0.5)
    single = AtomicMeasure(np.zeros((1, 1)), np.array([DENSITY]), 0.0)
    res = positive_definiteness_gram(single, [f])
    assert res["matrix"][0][0] == pytest.approx(DENSITY / 3, rel=1e-9)
    tents = [TestFunction("tent", c, 0.7) for c in np.linspace(-3, 3.5, 8)]
    full = positive_definiteness_gram(measure, tents)
    assert full["verdict"] == "PositiveDefinite"
    assert full["min_eigenvalue"] >= -1e-8 * full["trace"]
    neg = measure.with_weight(int(np.argmin(np.abs(measure.locations[:, 0]))), -DENSITY)
    bad = positive_definiteness_gram(neg, tents)
    assert bad["verdict"] == "NotPositiveDefinite" and bad["min_eigenvalue"] < 0


def test_density_trace_examples(fib):
    z = density_bound_trace(fib, BOX, np.arange(1000, 10001, 1000))
    assert z["verdict"] == "Stable"
    assert z["ratios"][-1] == pytest.approx(DENSITY, rel=0.02)
    lat = density_bound_trace(LatticeSet([[1.0]]), BOX, np.arange(10, 200) + 0.5)
    assert lat["ratios"] == [1.0] * 190
    h = HeisenbergModelSet((0.8, 0.8, 0.8))
    hr = density_bound_trace(h, AveragingSequence("heis_box"), np.arange(20, 201, 20))
    assert hr["verdict"] == "Stable"
    assert hr["ratios"][-1] == pytest.approx(h.density(), rel=0.05)
    assert h.density() == pytest.approx(0.18102, abs=1e-5)
    with pytest.raises(ConfigError):
        density_bound_trace(fib, BOX, [3.0, 2.0])


def test_heisenberg_sigma_identity():
    h = HeisenbergModelSet((0.8, 0.8, 0.8))
    seq = AveragingSequence("heis_box")
    f = TestFunction("tent", [0, 0, 0], 0.3, h.law)
    tr = sigma_t(h, seq, f, [6.0])
    # the quasi-norm separation exceeds 0.3, so only self pairs contribute
    assert tr.values[0] == pytest.approx(tr.counts[0] / seq.volume(6.0), rel=1e-12)


@pytest.fixture(scope="module")
def sl2():
    return SL2ModelSet(1.3, None)


def test_sl2_ratio_identity(sl2):
    f = TestFunction("tent", [1, 0, 0, 1], 0.5, sl2.law)
    r = sl2_sigma_ratio(sl2, f, f, [3.0, 4.0])
    assert r["ratio"] == [1.0, 1.0]


def test_sl2_gap_function_gives_zero(sl2):
    gap = sl2_gap_function(sl2)
    f2 = TestFunction("tent", [1, 0, 0, 1], 0.5, sl2.law)
    r = sl2_sigma_ratio(sl2, gap, f2, [3.0, 4.0])
    assert r["ratio"] == [0.0, 0.0]
    assert min(r["sigma_f2"]) > 0


def test_compare_report(fib):
    rep = compare_autocorrelation(fib, 3, 2000.0, tol=0.05)
    assert len(rep["atoms"]) == 3 and rep["verdict"] == "pass"


def test_profiles():
    g = TestFunction("truncated-gaussian", 0.0, 1.0)
    assert g(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert g(np.array([[1.0]]))[0] == 0.0
    with pytest.raises(ConfigError):
        TestFunction("box", 0.0, 1.0)
    with pytest.raises(ConfigError):
        TestFunction("tent", 0.0, 0.0)
