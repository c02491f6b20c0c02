import math

import numpy as np
import pytest

from modelset.errors import ConfigError, IncompleteSearchWarning, NotExact
from modelset.groups import (
    HEIS,
    SL2,
    AveragingSequence,
    HeisenbergModelSet,
    SL2ModelSet,
    certified_entry_bound,
    folner_defect,
    heis_star,
    hyperbolic_displacement,
    hyperbolic_distance_mobius,
    kak,
    sl2_membership,
    weak_admissibility_report,
)

from oracles import sl2_brute


def _rand_heis(rng, n):
    return rng.integers(-20, 21, size=(n, 3, 2))


def _rand_sl2(rng, n):
    return kak(rng.uniform(0, np.pi, n), rng.uniform(0, 3, n), rng.uniform(0, np.pi, n))


@pytest.mark.parametrize("law,gen", [(HEIS, lambda r, n: r.normal(size=(n, 3))), (SL2, _rand_sl2)])
def test_group_axioms(law, gen):
    rng = np.random.default_rng(1)
    g, h, k = gen(rng, 50), gen(rng, 50), gen(rng, 50)
    assert np.allclose(law.mul(law.mul(g, h), k), law.mul(g, law.mul(h, k)), atol=1e-9)
    assert np.allclose(law.mul(g, law.inv(g)), law.identity(), atol=1e-9)
    assert np.allclose(law.mul(law.identity(), g), g)


def test_heis_exact_matches_float_and_star_is_homomorphism():
    rng = np.random.default_rng(2)
    g, h = _rand_heis(rng, 100), _rand_heis(rng, 100)
    from modelset.zsqrt2 import to_float

    assert np.allclose(to_float(HEIS.mul_exact(g, h)), HEIS.mul(to_float(g), to_float(h)), rtol=1e-12)
    assert np.array_equal(heis_star(HEIS.mul_exact(g, h)), HEIS.mul_exact(heis_star(g), heis_star(h)))
    assert np.array_equal(HEIS.mul_exact(g, HEIS.inv_exact(g)), np.zeros_like(g))
    with pytest.raises(NotExact):
        heis_star(np.array([[0.5, 0.0, 0.0]]))


def test_heis_examples():
    m = HeisenbergModelSet((0.8, 0.8, 0.8))
    # (1 + √2, 0, 0) has star (1 - √2, 0, 0), inside the window
    g = np.array([[[1, 1], [0, 0], [0, 0]]])
    assert m.star_in_window(g)[0]
    assert not m.star_in_window(np.array([[[1, 0], [0, 0], [0, 0]]]))[0]
    assert m.star_in_window(np.zeros((1, 3, 2), dtype=np.int64))[0]
    with pytest.raises(ConfigError):
        HeisenbergModelSet((1.0, 0.8, 0.8))


def test_heis_patch_consistency():
    m = HeisenbergModelSet((0.8, 0.8, 0.8))
    p = m.patch(6.0)
    assert len(p) == m.count(6.0)
    assert m.star_in_window(p.exact).all()
    assert AveragingSequence("heis_box").member(p.points, 6.0).all()
    # symmetric under the coordinate flip g -> -g
    flip = {tuple(x) for x in (-p.exact).reshape(len(p), -1).tolist()}
    assert flip == {tuple(x) for x in p.exact.reshape(len(p), -1).tolist()}
    assert abs(len(p) / AveragingSequence("heis_box").volume(6.0) / m.density() - 1) < 0.5


def test_sl2_matches_bruteforce_oracle():
    got = SL2ModelSet(1.3, 3).patch(3.0)
    ref = sl2_brute(1.3, 3.0, 3)
    as_set = {tuple(tuple(e) for e in g) for g in got.exact.tolist()}
    assert as_set == ref
    assert len(ref) == 45


def test_sl2_certified_bound_complete():
    t = 2.5
    N = certified_entry_bound(t, 1.3)
    full = SL2ModelSet(1.3, None).patch(t)
    bounded = SL2ModelSet(1.3, N).patch(t)
    assert len(full) == len(bounded)
    assert np.abs(full.exact).max() <= N


def test_sl2_boundary_warning():
    with pytest.warns(IncompleteSearchWarning):
        SL2ModelSet(1.3, 1).patch(3.0)


def test_sl2_membership_examples():
    ident = np.array([[1, 0], [0, 0], [0, 0], [1, 0]])
    r = sl2_membership(ident, 1.3, 1.0)
    assert r.in_window and r.window_distance == 0.0 and r.cosh_distance == 1.0
    # [[1, 1+√2], [0, 1]]: star entry 1 - √2, Frobenius distance |1 - √2| ≈ 0.414
    u = np.array([[1, 0], [1, 1], [0, 0], [1, 0]])
    r = sl2_membership(u, 1.3, 10.0)
    assert r.in_window and r.window_distance == pytest.approx(math.sqrt(2) - 1)
    # [[1, 2], [0, 1]] has star distance 2 > 1.3
    assert not sl2_membership(np.array([[1, 0], [2, 0], [0, 0], [1, 0]]), 1.3, 10.0).in_window


def test_cosh_formula_vs_mobius():
    rng = np.random.default_rng(3)
    g = _rand_sl2(rng, 100)
    assert np.allclose(hyperbolic_displacement(g), hyperbolic_distance_mobius(g), atol=1e-7)
    r = rng.uniform(0, 3, 20)
    assert np.allclose(hyperbolic_displacement(kak(0.3, r, 1.1)), r, atol=1e-7)


def test_weak_admissibility_examples():
    heis = weak_admissibility_report(AveragingSequence("heis_box"), [2, 5, 10], [0.1])[0]
    assert heis["alpha"] <= 0.2 + 1e-12
    box = weak_admissibility_report(AveragingSequence("box", 2), [1, 10, 100], [0.0, 0.5])
    assert box[0] == {"delta": 0.0, "alpha": 0.0, "beta": 0.0}
    assert box[1]["alpha"] == pytest.approx(0.5)
    seq = AveragingSequence("hyp_ball")
    hyp = weak_admissibility_report(seq, [1, 2, 4], [0.1])[0]
    # left invariance: d(i, g b i) <= d(i, g i) + d(i, b i)
    assert 0 < hyp["alpha"] <= hyperbolic_displacement(seq.identity_ball(0.1, 7)).max() + 1e-9


def test_folner_defect_decreases():
    seq = AveragingSequence("heis_box")
    g = np.array([1.0, 1.0, 1.0])
    defects = [folner_defect(seq, g, t) for t in (4, 8, 16)]
    assert defects[0] > defects[1] > defects[2]
    assert folner_defect(seq, np.zeros(3), 5) == 0.0


def test_sequence_sample_within_family():
    for fam in ("box", "ball", "heis_box", "hyp_ball"):
        seq = AveragingSequence(fam, 2)
        s = seq.sample(3.0)
        assert (seq.radius(s) <= 3.0 + 1e-9).all()
    with pytest.raises(ConfigError):
        AveragingSequence("cube")
