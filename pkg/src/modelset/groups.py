"""Non-abelian scheme instances over Z[√2].

* Heisenberg: ``H(Z[√2]) ⊂ H(R) x H(R)`` with entrywise Galois conjugation as
  star map and a coordinate box as window.
* SL2: ``SL2(Z[√2]) ⊂ SL2(R) x SL2(R)`` with the window
  ``{h : ||h - I||_F <= rho}``.

Elements are kept exactly as integer arrays of shape ``(n, k, 2)`` (k = 3 or 4
entries, each a Z[√2] pair) next to their float coordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import zsqrt2
from .errors import ConfigError, IncompleteSearchWarning, NotExact, RegionTooLarge
from .grouplaw import EuclideanLaw, HeisenbergLaw, SL2Law
from .patch import Box, GroupRegion, PointPatch
from .zsqrt2 import SQRT2, conj_pairs, mul_pairs, to_float

DEFAULT_BUDGET = 10_000_000
HEIS = HeisenbergLaw()
SL2 = SL2Law()


def _require_exact(g) -> np.ndarray:
    g = np.asarray(g)
    if not np.issubdtype(g.dtype, np.integer) and g.dtype != object:
        raise NotExact("entries must be integer pairs (a, b) meaning a + b√2")
    if g.shape[-1] != 2:
        raise NotExact("last axis must hold (a, b) pairs")
    return g


def heis_star(g) -> np.ndarray:
    """Entrywise Galois conjugation of Heisenberg elements given as pairs."""
    return conj_pairs(_require_exact(g))


def heis_to_float(g) -> np.ndarray:
    return to_float(_require_exact(g))


# -- averaging families -----------------------------------------------------


class AveragingSequence:
    """A family ``F_t`` given by a radius function: ``g in F_t`` iff ``radius(g) <= t``.

    Families: ``box`` ([-t, t]^d), ``ball`` (Euclidean ball), ``heis_box``
    (``|x|, |y| <= t, |z| <= t^2``) and ``hyp_ball``
    (``d_hyp(i, g.i) <= t`` in SL2(R)).
    """

    families = ("box", "ball", "heis_box", "hyp_ball")

    def __init__(self, family: str, dim: int = 1):
        if family not in self.families:
            raise ConfigError(f"unknown averaging family {family!r}")
        self.family = family
        self.dim = {"heis_box": 3, "hyp_ball": 4}.get(family, dim)

    @property
    def law(self):
        if self.family == "heis_box":
            return HEIS
        if self.family == "hyp_ball":
            return SL2
        return EuclideanLaw(self.dim)

    def volume(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "box":
            return (2 * t) ** self.dim
        if self.family == "ball":
            d = self.dim
            return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * t**d
        if self.family == "heis_box":
            return 8 * t**4
        return 4 * math.pi * np.sinh(t / 2) ** 2

    def radius(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float).reshape(-1, self.dim)
        if self.family == "box":
            return np.abs(g).max(axis=1)
        if self.family == "ball":
            return np.linalg.norm(g, axis=1)
        if self.family == "heis_box":
            return np.maximum(np.abs(g[:, :2]).max(axis=1), np.sqrt(np.abs(g[:, 2])))
        return hyperbolic_displacement(g)

    def member(self, g, t) -> np.ndarray:
        if self.family == "hyp_ball":
            g = np.asarray(g, dtype=float).reshape(-1, 4)
            return (g**2).sum(axis=1) <= 2 * math.cosh(t)
        return self.radius(g) <= t

    def region(self, t) -> Box | GroupRegion:
        if self.family in ("box", "ball"):
            return Box.cube(t, self.dim)
        return GroupRegion(self.family, float(t))

    def sample(self, t: float, n: int = 7) -> np.ndarray:
        """Deterministic grid of elements of ``F_t`` including boundary points."""
        if self.family in ("box", "ball"):
            axis = np.linspace(-t, t, n)
            g = np.stack([a.ravel() for a in np.meshgrid(*[axis] * self.dim, indexing="ij")], axis=1)
            if self.family == "ball":
                g = g[np.linalg.norm(g, axis=1) <= t]
                # add points on the sphere along the axes
                g = np.concatenate([g, t * np.eye(self.dim), -t * np.eye(self.dim)])
            return g
        if self.family == "heis_box":
            axis = np.linspace(-1, 1, n)
            u = np.stack([a.ravel() for a in np.meshgrid(axis, axis, axis, indexing="ij")], axis=1)
            return u * np.array([t, t, t * t])
        r = np.linspace(0, t, n)
        th = np.linspace(0, math.pi, n, endpoint=False)
        R, A, B = np.meshgrid(r, th, th, indexing="ij")
        return kak(A.ravel(), R.ravel(), B.ravel())

    def identity_ball(self, delta: float, n: int = 5) -> np.ndarray:
        """Sample of the ball of radius ``delta`` around the identity."""
        if self.family in ("box", "ball"):
            axis = np.linspace(-delta, delta, n)
            b = np.stack([a.ravel() for a in np.meshgrid(*[axis] * self.dim, indexing="ij")], axis=1)
            return b[np.linalg.norm(b, axis=1) <= delta + 1e-15]
        if self.family == "heis_box":
            axis = np.linspace(-1, 1, n)
            u = np.stack([a.ravel() for a in np.meshgrid(axis, axis, axis, indexing="ij")], axis=1)
            return u * np.array([delta, delta, delta * delta])
        axis = np.linspace(-delta, delta, n)
        X = np.stack([a.ravel() for a in np.meshgrid(axis, axis, axis, indexing="ij")], axis=1)
        b = sl2_exp(X)
        return b[SL2.norm(b) <= delta + 1e-15]


def kak(theta, r, phi) -> np.ndarray:
    """``k(theta) diag(e^{r/2}, e^{-r/2}) k(phi)``; moves i by hyperbolic distance r."""
    theta, r, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (theta, r, phi)))
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    e, f = np.exp(r / 2), np.exp(-r / 2)
    k1 = np.stack([ct, -st, st, ct], axis=-1)
    a = np.stack([e, np.zeros_like(e), np.zeros_like(e), f], axis=-1)
    k2 = np.stack([cp, -sp, sp, cp], axis=-1)
    return SL2.mul(SL2.mul(k1, a), k2).reshape(-1, 4)


def sl2_exp(X) -> np.ndarray:
    """Matrix exponential of traceless ``[[x, y + z], [y - z, -x]]`` for rows (x, y, z)."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    x, y, z = X.T
    q = x * x + y * y - z * z  # -det of the generator
    s = np.sqrt(np.abs(q))
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(q > 0, np.cosh(s), np.where(q < 0, np.cos(s), 1.0))
        k = np.where(q > 0, np.sinh(s) / np.where(s == 0, 1, s), np.where(q < 0, np.sin(s) / np.where(s == 0, 1, s), 1.0))
    return np.stack([c + k * x, k * (y + z), k * (y - z), c - k * x], axis=1)


def hyperbolic_displacement(g) -> np.ndarray:
    """``d(i, g.i)`` from ``cosh d = (a^2 + b^2 + c^2 + d^2) / 2``."""
    g = np.asarray(g, dtype=float).reshape(-1, 4)
    return np.arccosh(np.maximum(1.0, (g**2).sum(axis=1) / 2))


def hyperbolic_distance_mobius(g) -> np.ndarray:
    """Reference value of ``d(i, g.i)`` via the Möbius action on the upper half plane."""
    g = np.asarray(g, dtype=float).reshape(-1, 4)
    a, b, c, d = g.T
    w = (a * 1j + b) / (c * 1j + d)
    return np.arccosh(1 + np.abs(w - 1j) ** 2 / (2 * w.imag))


# -- weak admissibility ----------------------------------------------------------


def weak_admissibility_report(seq: AveragingSequence, t_grid, delta_grid, samples: int = 7) -> list[dict]:
    """Empirical inflation constant ``alpha(delta)`` and volume growth ``beta(delta)``.

    ``alpha`` is the smallest value with ``g b in F_{t + alpha}`` for all
    sampled ``g in F_t`` and ``b`` in the ``delta``-ball around the identity;
    ``beta`` is ``max_s vol(F_{s + delta}) / vol(F_s) - 1`` over ``t_grid``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    law = seq.law
    rows = []
    for delta in delta_grid:
        delta = float(delta)
        if delta == 0:
            rows.append({"delta": 0.0, "alpha": 0.0, "beta": 0.0})
            continue
        b = seq.identity_ball(delta, samples)
        alpha = 0.0
        for t in t_grid:
            g = seq.sample(t, samples)
            g = g[seq.radius(g) <= t + 1e-12]
            prod = law.mul(g[:, None, :], b[None, :, :]).reshape(-1, seq.dim)
            alpha = max(alpha, float((seq.radius(prod) - t).max()))
        beta = float(np.max(seq.volume(t_grid + delta) / seq.volume(t_grid))) - 1.0
        rows.append({"delta": delta, "alpha": max(alpha, 0.0), "beta": beta})
    return rows


def folner_defect(seq: AveragingSequence, g, t: float, n: int = 40) -> float:
    """Monte-Carlo-free estimate of ``|F_t Δ g F_t| / |F_t|`` on a regular grid."""
    lo, hi = _family_box(seq, t)
    hi = hi + 1e-9
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    pts = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    in_f = seq.member(pts, t)
    in_gf = seq.member(seq.law.mul(seq.law.inv(np.asarray(g, dtype=float)), pts), t)
    return float(np.sum(in_f ^ in_gf) / max(1, np.sum(in_f)))


def _family_box(seq, t):
    if seq.family == "heis_box":
        # g F_t is contained in the box for t large compared with g
        return np.array([-2 * t, -2 * t, -2 * t * t]), np.array([2 * t, 2 * t, 2 * t * t])
    return -2 * t * np.ones(seq.dim), 2 * t * np.ones(seq.dim)


# -- Heisenberg model set --------------------------------------------------------


class HeisenbergModelSet:
    """``{g in H(Z[√2]) : star(g) in the coordinate box with half widths s}``."""

    law = HEIS
    family = "heis_box"

    def __init__(self, half_widths=(0.8, 0.8, 0.8), budget: int = DEFAULT_BUDGET):
        self.half_widths = [zsqrt2.to_fraction(s) for s in half_widths]
        if len(self.half_widths) != 3 or any(s <= 0 for s in self.half_widths):
            raise ConfigError("Heisenberg window needs three positive half widths")
        for s in self.half_widths:
            # a rational lies in Z[√2] iff it is an integer
            if s.denominator == 1:
                raise ConfigError(f"half width {s} lies in Z[√2]; window is not regular")
        self.budget = budget

    def density(self) -> float:
        return float(np.prod([2 * float(s) for s in self.half_widths])) / (2 * SQRT2) ** 3

    def _coordinate_lists(self, T: float):
        sx, sy, sz = self.half_widths
        xs = zsqrt2.enumerate_1d(-T, T, -sx, sx)
        ys = zsqrt2.enumerate_1d(-T, T, -sy, sy)
        zs = zsqrt2.enumerate_1d(-T * T, T * T, -sz, sz)
        return xs, ys, zs

    def count(self, T: float) -> int:
        xs, ys, zs = self._coordinate_lists(T)
        return len(xs) * len(ys) * len(zs)

    def largest_t_within_budget(self, budget: int, t_max: float = 1e3, tol: float = 1e-3) -> float:
        lo, hi = 1.0, t_max
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.count(mid) <= budget:
                lo = mid
            else:
                hi = mid
        return lo

    def patch(self, T: float) -> PointPatch:
        xs, ys, zs = self._coordinate_lists(T)
        total = len(xs) * len(ys) * len(zs)
        if total > self.budget:
            raise RegionTooLarge(f"{total} Heisenberg points exceed budget {self.budget}")
        ix, iy, iz = np.meshgrid(np.arange(len(xs)), np.arange(len(ys)), np.arange(len(zs)), indexing="ij")
        exact = np.stack([xs[ix.ravel()], ys[iy.ravel()], zs[iz.ravel()]], axis=1)
        return PointPatch(to_float(exact), GroupRegion("heis_box", float(T)), HEIS, exact)

    def star_in_window(self, exact) -> np.ndarray:
        star = conj_pairs(exact)
        mask = np.ones(len(exact), dtype=bool)
        for k, s in enumerate(self.half_widths):
            mask &= zsqrt2.in_interval(star[:, k, 0], star[:, k, 1], -s, s)
        return mask

    def difference_candidates(self, center, reach) -> np.ndarray:
        """Lattice elements ``h`` with ``|center^-1 h| <= reach`` and ``star(h)`` in ``W^-1 W``.

        Returned as a superset (coordinate boxes); callers filter by the test
        function and by window membership of products.
        """
        cx, cy, cz = (float(v) for v in np.asarray(center, dtype=float))
        sx, sy, sz = (float(s) for s in self.half_widths)
        w = float(reach)
        xs = zsqrt2.enumerate_1d(cx - w, cx + w, -2 * sx, 2 * sx)
        ys = zsqrt2.enumerate_1d(cy - w, cy + w, -2 * sy, 2 * sy)
        zr = w * w + abs(cx) * w
        zi = 2 * sz + 2 * sx * sy
        zs = zsqrt2.enumerate_1d(cz - zr - 1e-9, cz + zr + 1e-9, -zi, zi)
        ix, iy, iz = np.meshgrid(np.arange(len(xs)), np.arange(len(ys)), np.arange(len(zs)), indexing="ij")
        return np.stack([xs[ix.ravel()], ys[iy.ravel()], zs[iz.ravel()]], axis=1)


def heis_enumerate(half_widths, T: float, budget: int = DEFAULT_BUDGET) -> PointPatch:
    return HeisenbergModelSet(half_widths, budget).patch(T)


# -- SL2 model set ----------------------------------------------------------------


DIAG = (0, 3)


def certified_entry_bound(t: float, rho: float) -> int:
    """Coefficient bound that makes the SL2 search complete for ``(t, rho)``.

    Every entry e satisfies ``|e| <= sqrt(2 cosh t)`` and ``|e*| <= 1 + rho``,
    so its coefficients ``(e + e*)/2`` and ``(e - e*)/(2√2)`` are bounded.
    """
    r = math.sqrt(2 * math.cosh(t)) + 1 + rho
    return int(math.ceil(r / 2))


def sl2_lattice_search(phys_center, phys_radius, int_center, int_radius, coeff_bound=None, budget=DEFAULT_BUDGET):
    """Elements of SL2(Z[√2]) with ``||g - c||_F <= r`` and ``||g* - c*||_F <= r*``.

    Entries are enumerated one at a time from one-dimensional Z[√2] model
    sets, partial sums of squares prune the search, and the last entry is
    solved from ``det = 1`` by exact division. Frobenius tests use a 1e-9
    outward slack; callers apply exact final conditions.
    """
    pc = np.asarray(phys_center, dtype=float)
    ic = np.asarray(int_center, dtype=float)
    R2 = phys_radius**2 + 1e-9
    S2 = int_radius**2 + 1e-9
    cands = []
    for k in range(4):
        c = zsqrt2.enumerate_1d(pc[k] - phys_radius, pc[k] + phys_radius, ic[k] - int_radius, ic[k] + int_radius, exact=False)
        if coeff_bound is not None:
            c = c[np.abs(c).max(axis=1) <= coeff_bound]
        cands.append(c)
    A, B, C, D = cands

    def dev(x, k):
        return (to_float(x) - pc[k]) ** 2, (zsqrt2.to_float_conj(x) - ic[k]) ** 2

    a_p, a_i = dev(A, 0)
    b_p, b_i = dev(B, 1)
    c_p, c_i = dev(C, 2)
    # (a, b) pairs
    pa, pb = np.nonzero((a_p[:, None] + b_p[None, :] <= R2) & (a_i[:, None] + b_i[None, :] <= S2))
    if len(pa) * max(1, len(C)) > budget * 10:
        raise RegionTooLarge(f"{len(pa) * len(C)} SL2 candidate triples exceed budget")
    found = []
    d_set = {tuple(x) for x in D.tolist()}
    chunk = max(1, 2_000_000 // max(1, len(C)))
    for s in range(0, len(pa), chunk):
        ia, ib = pa[s : s + chunk], pb[s : s + chunk]
        ok = (a_p[ia, None] + b_p[ib, None] + c_p[None, :] <= R2) & (a_i[ia, None] + b_i[ib, None] + c_i[None, :] <= S2)
        ja, jc = np.nonzero(ok)
        if len(ja) == 0:
            continue
        a = A[ia[ja]]
        b = B[ib[ja]]
        c = C[jc]
        nonzero = np.any(a != 0, axis=1)
        # a != 0: d = (1 + bc) / a
        an, bn, cn = a[nonzero], b[nonzero], c[nonzero]
        num = mul_pairs(bn, cn)
        num[:, 0] += 1
        norm = an[:, 0] ** 2 - 2 * an[:, 1] ** 2
        q = mul_pairs(num, conj_pairs(an))
        div = (q[:, 0] % norm == 0) & (q[:, 1] % norm == 0)
        d = q[div] // norm[div, None]
        g = np.stack([an[div], bn[div], cn[div], d], axis=1)
        keep = np.array([tuple(x) in d_set for x in d.tolist()], dtype=bool) if len(d) else np.zeros(0, dtype=bool)
        found.append(g[keep])
        # a == 0: bc = -1, d free
        az, bz, cz = a[~nonzero], b[~nonzero], c[~nonzero]
        if len(az):
            prod = mul_pairs(bz, cz)
            unit = (prod[:, 0] == -1) & (prod[:, 1] == 0)
            for x, y, z in zip(az[unit], bz[unit], cz[unit]):
                g = np.stack([np.repeat(x[None], len(D), 0), np.repeat(y[None], len(D), 0), np.repeat(z[None], len(D), 0), D], axis=1)
                found.append(g)
    if not found:
        return np.zeros((0, 4, 2), dtype=np.int64)
    g = np.concatenate(found).astype(np.int64)
    gp = to_float(g)
    gi = zsqrt2.to_float_conj(g)
    ok = (((gp - pc) ** 2).sum(axis=1) <= R2) & (((gi - ic) ** 2).sum(axis=1) <= S2)
    g = g[ok]
    det = SL2.det_exact(g)
    assert np.all((det[:, 0] == 1) & (det[:, 1] == 0))
    return g


def frobenius_sq_exact(g, center_diag: int = 1, conjugate: bool = True) -> np.ndarray:
    """``||g* - c I||_F^2`` as Z[√2] pairs (``g`` with ``conjugate=False``)."""
    h = conj_pairs(g) if conjugate else np.array(g, copy=True)
    h = h.copy()
    for k in DIAG:
        h[:, k, 0] -= center_diag
    return mul_pairs(h, h).sum(axis=1)


class SL2ModelSet:
    """``{g in SL2(Z[√2]) : ||g* - I||_F <= rho}`` with coefficient bound N."""

    law = SL2
    family = "hyp_ball"

    def __init__(self, rho: float = 1.3, entry_bound: int | None = 12, budget: int = DEFAULT_BUDGET):
        self.rho = zsqrt2.to_fraction(rho)
        if self.rho <= 0:
            raise ConfigError("window radius must be positive")
        self.entry_bound = entry_bound
        self.budget = budget

    def star_in_window(self, exact) -> np.ndarray:
        sq = frobenius_sq_exact(exact)
        return zsqrt2.compare_rational_array(sq[:, 0], sq[:, 1], self.rho**2) <= 0

    def near_boundary(self, exact, tol: float = 1e-6) -> np.ndarray:
        star = zsqrt2.to_float_conj(np.asarray(exact))
        dist = SL2.norm(star)
        return np.abs(dist - float(self.rho)) < tol

    def patch(self, t: float, entry_bound: int | None = None) -> PointPatch:
        N = self.entry_bound if entry_bound is None else entry_bound
        g = sl2_lattice_search(np.zeros(4), math.sqrt(2 * math.cosh(t)), SL2.identity(), float(self.rho), N, self.budget)
        g = g[self.star_in_window(g)]
        g = g[(to_float(g) ** 2).sum(axis=1) <= 2 * math.cosh(t)]
        if len(g) > self.budget:
            raise RegionTooLarge(f"{len(g)} SL2 points exceed budget {self.budget}")
        if N is not None and len(g) and np.abs(g).max() >= N:
            warnings.warn(
                f"SL2 search hits the integer box boundary N={N}; result may be incomplete "
                f"(certified bound for t={t}: {certified_entry_bound(t, float(self.rho))})",
                IncompleteSearchWarning,
                stacklevel=2,
            )
        if self.near_boundary(g).any():
            warnings.warn("a star image lies within 1e-6 of the window boundary; perturb rho", IncompleteSearchWarning, stacklevel=2)
        patch = PointPatch(to_float(g), GroupRegion("hyp_ball", float(t)), SL2, g)
        patch.meta["entry_bound"] = N
        return patch

    def difference_candidates(self, center, reach) -> np.ndarray:
        """Lattice ``h`` with ``||h - center||_F <= reach`` and ``star(h)`` in ``W^-1 W``."""
        star_bound = (SQRT2 + float(self.rho)) ** 2
        return sl2_lattice_search(np.asarray(center, dtype=float), reach, np.zeros(4), star_bound, None, self.budget)


def sl2_enumerate(rho: float, t: float, entry_bound: int | None, budget: int = DEFAULT_BUDGET) -> PointPatch:
    return SL2ModelSet(rho, entry_bound, budget).patch(t)


@dataclass
class SL2Check:
    """Outcome of evaluating one explicit matrix against the SL2 model set."""

    in_window: bool
    cosh_distance: float
    window_distance: float


def sl2_membership(g_exact, rho: float, t: float) -> SL2Check:
    g = np.asarray(g_exact).reshape(1, 4, 2)
    ms = SL2ModelSet(rho, None)
    cosh_d = float((to_float(g) ** 2).sum() / 2)
    star = zsqrt2.to_float_conj(g)
    return SL2Check(bool(ms.star_in_window(g)[0]) and cosh_d <= math.cosh(t), cosh_d, float(SL2.norm(star)[0]))
