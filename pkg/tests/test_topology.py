import itertools

import numpy as np
import pytest

from modelset.errors import ConfigError, IncompletePatch
from modelset.patch import Box, PointPatch, lattice_patch
from modelset.topology import (
    PatchSet,
    _translated_patch,
    chabauty_basic,
    chabauty_miss,
    entourage_bruteforce,
    flc_orbit_criterion,
    local_entourage_member,
    local_rubber_member,
)


def Z(lo, hi, shift=0.0, step=1.0):
    return PointPatch(lattice_patch([[step]], Box([lo - shift], [hi - shift])).points + shift, Box([lo], [hi]))


# -- integer oracle ------------------------------------------------------------
# Coordinates are integers. Breakpoints of the predicate in t lie on a lattice
# coarser than the scan, and eps sits on a breakpoint, so every cell of the
# arrangement meeting the open eps-ball contains a scanned integer point.


def _trace_int(points, lo, hi):
    return {p for p in points if all(l <= c <= h for c, l, h in zip(p, lo, hi))}


def oracle_entourage(P, Q, lo, hi, eps):
    d = len(lo)
    target = _trace_int(P, lo, hi)
    for t in itertools.product(range(-eps, eps + 1), repeat=d):
        if sum(c * c for c in t) >= eps * eps:
            continue
        moved = [tuple(q + s for q, s in zip(pt, t)) for pt in Q]
        if _trace_int(moved, lo, hi) == target:
            return True
    return False


def _as_patch(pts, lo, hi, d):
    arr = np.array(sorted(pts), dtype=float).reshape(-1, d)
    return PointPatch(arr, Box(lo, hi))


def _instance(rng, d):
    unit = 10 if d == 1 else 20
    k_eps = int(rng.integers(0, 3))
    eps = unit * k_eps + unit // 2
    lo = [unit * int(rng.integers(-3, 1)) + unit // 2 for _ in range(d)]
    hi = [l + unit * int(rng.integers(1, 5)) for l in lo]
    rlo = [l - eps - 2 * unit for l in lo]
    rhi = [h + eps + 2 * unit for h in hi]
    axes = [range(rl // unit, rh // unit + 1) for rl, rh in zip(rlo, rhi)]
    grid = [tuple(unit * c for c in p) for p in itertools.product(*axes)]
    density = rng.uniform(0.2, 0.7)
    P = {p for p in grid if rng.random() < density}
    mode = rng.integers(0, 3)
    if mode == 0:
        Q = {p for p in grid if rng.random() < density}
    else:
        s = [unit * int(rng.integers(-k_eps - 1, k_eps + 2)) for _ in range(d)]
        Q = {tuple(c - o for c, o in zip(p, s)) for p in P}
        Q = {q for q in Q if all(a <= c <= b for c, a, b in zip(q, rlo, rhi))}
        if mode == 2 and grid:
            Q ^= {grid[int(rng.integers(len(grid)))]}
    return P, Q, lo, hi, eps, rlo, rhi


def _holds(P, Q, K, t):
    moved = Q.points + np.asarray(t)
    a = P.points[K.contains(P.points)]
    b = moved[K.contains(moved)]
    return len(a) == len(b) and np.allclose(np.sort(a, axis=0), np.sort(b, axis=0), atol=1e-9)


@pytest.mark.parametrize("d,n,seed", [(1, 400, 11), (2, 100, 12)])
def test_candidate_method_matches_integer_oracle(d, n, seed):
    rng = np.random.default_rng(seed)
    yes = 0
    for _ in range(n):
        P, Q, lo, hi, eps, rlo, rhi = _instance(rng, d)
        Pp, Qp = _as_patch(P, rlo, rhi, d), _as_patch(Q, rlo, rhi, d)
        K = Box(lo, hi)
        got = local_entourage_member(Pp, Qp, K, float(eps))
        want = oracle_entourage(P, Q, lo, hi, eps)
        assert (got["verdict"] == "Yes") == want, (P, Q, lo, hi, eps, got)
        if want:
            yes += 1
            assert np.linalg.norm(got["witness_t"]) < eps
            assert _holds(Pp, Qp, K, got["witness_t"])
    # both outcomes are exercised
    assert 0.15 * n < yes < 0.85 * n


def test_library_bruteforce_agrees_on_small_instances():
    rng = np.random.default_rng(13)
    for _ in range(60):
        P, Q, lo, hi, eps, rlo, rhi = _instance(rng, 1)
        Pp, Qp = _as_patch(P, rlo, rhi, 1), _as_patch(Q, rlo, rhi, 1)
        K = Box(lo, hi)
        fast = local_entourage_member(Pp, Qp, K, float(eps))["verdict"]
        assert entourage_bruteforce(Pp, Qp, K, float(eps), resolution=1.0)["verdict"] == fast


# -- examples -----------------------------------------------------------------


def test_chabauty_examples(fib):
    z = Z(-5, 5)
    assert not chabauty_basic(z, Box([0.4], [0.6]))
    assert chabauty_miss(z, Box([0.25], [0.75]))
    assert not chabauty_miss(z, Box([0.0], [0.5]))
    assert chabauty_basic(fib.patch(Box([0], [6])), Box([2.3], [2.5]))
    with pytest.raises(IncompletePatch):
        chabauty_basic(z, Box([4], [6]))


def test_rubber_examples():
    P = Z(-5, 15)
    Q = Z(-5, 15, 0.3)
    K = Box([0], [10])
    assert local_rubber_member(P, P, K, 1e-6)
    assert local_rubber_member(Q, P, K, 0.31)
    assert not local_rubber_member(Q, P, K, 0.29)
    extra = PointPatch(np.concatenate([P.points, [[4.5]]]), P.region)
    assert not local_rubber_member(extra, P, K, 0.4)
    with pytest.raises(ConfigError):
        local_rubber_member(P, P, K, 0.0)


def test_entourage_examples():
    K = Box([0], [10])
    P = Z(-5, 15)
    assert local_entourage_member(P, P, K, 0.1)["witness_t"] == [0.0]
    r = local_entourage_member(P, Z(-5, 15, 0.3), K, 0.5)
    assert r["verdict"] == "Yes" and r["witness_t"] == pytest.approx([-0.3])
    assert local_entourage_member(P, Z(-5, 15, 0, 2.0), Box([0], [3]), 0.5)["verdict"] == "No"
    with pytest.raises(IncompletePatch):
        local_entourage_member(P, Z(0, 10), K, 0.5)


def test_empty_trace_arrangement():
    K = Box([0], [1])
    P = PointPatch(np.array([[5.0]]), Box([-3], [6]))
    Q = PointPatch(np.array([[-0.2], [1.05]]), Box([-3], [6]))
    # t must keep both -0.2 + t and 1.05 + t outside [0, 1]: t in (-2.05, -1.2) ∪ (-0.05, 0.2) ∪ ...
    r = local_entourage_member(P, Q, K, 0.1)
    assert r["verdict"] == "Yes" and r["method"] == "arrangement"
    assert -0.05 < r["witness_t"][0] < 0.1
    Q2 = PointPatch(np.array([[-0.05], [0.5], [1.05]]), Box([-3], [6]))
    assert local_entourage_member(P, Q2, K, 0.1)["verdict"] == "No"


# -- axiom checks on model-set translates --------------------------------------


def _translates(fib, ts, box):
    return [_translated_patch(fib, t, box) for t in ts]


def test_symmetry_b3(fib):
    rng = np.random.default_rng(21)
    K = Box([0], [8])
    eps = 2.0
    hits = 0
    for _ in range(60):
        t1, t2 = rng.uniform(-300, 300, size=2)
        P, Q = _translates(fib, [[t1], [t2]], K.inflate(3 * eps))
        if local_entourage_member(P, Q, K, eps)["verdict"] == "Yes":
            hits += 1
            assert local_entourage_member(Q, P, K.deflate(eps), eps)["verdict"] == "Yes"
    assert hits > 0


def test_triangle_b4_and_finer_than_chabauty(fib):
    rng = np.random.default_rng(22)
    K = Box([0], [6])
    eps = 1.5
    Kp = K.inflate(eps)
    region = K.inflate(4 * eps)
    checked = 0
    for _ in range(80):
        base = rng.uniform(-500, 500)
        ts = [[base], [base + rng.uniform(-3, 3)], [base + rng.uniform(-3, 3)]]
        P, Q, R = _translates(fib, ts, region)
        pq = local_entourage_member(P, Q, Kp, eps)["verdict"] == "Yes"
        qr = local_entourage_member(Q, R, Kp, eps)["verdict"] == "Yes"
        if pq:
            assert local_rubber_member(Q, P, Kp.deflate(eps), 2 * eps)
        if pq and qr:
            checked += 1
            assert local_entourage_member(P, R, K, 2 * eps)["verdict"] == "Yes"
    assert checked > 0


# -- orbit criterion ------------------------------------------------------------


def test_orbit_criterion_lattice():
    from modelset.patch import LatticeSet

    rep = flc_orbit_criterion(LatticeSet([[1.0]]), Box([0], [5]), 1.1, n_samples=32, t_range=100)
    assert rep["success_fraction"] == 1.0 and rep["verdict"] == "Consistent"


def test_orbit_criterion_model_set(fib):
    rep = flc_orbit_criterion(fib, Box([0], [10]), None, n_samples=32, t_range=500)
    assert rep["success_fraction"] == 1.0
    assert rep["scan"]["max_witness"] > 0
    assert "evidence" in rep["coverage"]


def test_orbit_criterion_random_scatter():
    rng = np.random.default_rng(0)
    scatter = PatchSet(PointPatch(rng.uniform(-700, 700, 1400), Box([-700], [700])))
    rep = flc_orbit_criterion(scatter, Box([0], [10]), 50.0, n_samples=32, t_range=500)
    assert rep["success_fraction"] < 1.0
