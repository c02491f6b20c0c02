"""Delone and finite-local-complexity checks on finite patches.

Distances are ``d(e, x^-1 y)`` measured with the norm of the patch's group
law: Euclidean on R^d, the quasi-norm on Heisenberg and Frobenius distance
to I on SL2. The Heisenberg quasi-norm is not a metric, so only separation
and containment claims are made with it; difference sets themselves are
computed with exact group arithmetic where the patch carries exact data.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from . import zsqrt2
from .errors import ConfigError, MarginTooSmall, RegionTooThin, TooFewPoints, UnsupportedWindowGeometry
from .grouplaw import EuclideanLaw, HeisenbergLaw, SL2Law
from .patch import Box, GroupRegion, PointPatch

DEDUP_TOL = 1e-12
ACCUMULATION_TOL = 1e-9


def _report(check, verdict, witness=None, **parameters) -> dict:
    return {"check": check, "verdict": verdict, "witness": witness, "parameters": parameters}


def _first_axis_bound(law, x, r):
    """Bound on ``|y_0 - x_0|`` implied by ``d(e, x^-1 y) <= r``."""
    if isinstance(law, SL2Law):
        # ||y - x|| = ||x (x^-1 y - I)|| <= ||x||_F r
        return np.linalg.norm(x, axis=-1) * r
    return np.full(np.shape(x)[:-1], float(r))


def _group_pairs(patch: PointPatch, outer: np.ndarray, r: float):
    """Yield ``(i, js)``: indices j with ``d(e, x_i^-1 y_j) <= r``, for i in ``outer``."""
    law = patch.law
    pts = patch.points
    col = pts[:, 0]
    bounds = _first_axis_bound(law, pts[outer], r)
    for i, b in zip(outer, bounds):
        lo = np.searchsorted(col, pts[i, 0] - b - 1e-12, side="left")
        hi = np.searchsorted(col, pts[i, 0] + b + 1e-12, side="right")
        js = np.arange(lo, hi)
        if len(js) == 0:
            continue
        h = law.mul(law.inv(pts[i]), pts[js])
        keep = law.norm(h) <= r
        yield i, js[keep]


def min_separation(patch: PointPatch) -> float:
    """Smallest ``d(e, x^-1 y)`` over distinct points of the patch."""
    n = len(patch)
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    if patch.is_euclidean:
        d, _ = cKDTree(patch.points).query(patch.points, k=2)
        return float(d[:, 1].min())
    law = patch.law
    pts = patch.points
    col = pts[:, 0]
    best = math.inf
    # sweep along the first coordinate, shrinking the window as best improves
    for i in range(n):
        b = float(_first_axis_bound(law, pts[i : i + 1], best if best < math.inf else 1e300)[0])
        lo = np.searchsorted(col, col[i] - b, side="left")
        hi = np.searchsorted(col, col[i] + b, side="right")
        js = np.arange(lo, hi)
        js = js[js != i]
        if len(js):
            best = min(best, float(law.norm(law.mul(law.inv(pts[i]), pts[js])).min()))
    return best


def is_uniformly_discrete(patch: PointPatch, r: float) -> bool:
    if r <= 0:
        return True
    if len(patch) < 2:
        return True
    return min_separation(patch) >= r


def covering_radius(patch: PointPatch, margin: float | None = None, resolution: float | None = None) -> float:
    """Largest distance from a grid point of the region interior to the patch.

    The grid excludes a boundary margin (by default the estimate itself,
    refined until the margin covers it) and has spacing ``resolution``
    (default ``min_separation / 4``); the result is accurate to about
    ``resolution * sqrt(d) / 2``.
    """
    if not patch.is_euclidean or not isinstance(patch.region, Box):
        raise UnsupportedWindowGeometry("covering radius is implemented for Euclidean patches")
    if len(patch) == 0:
        raise TooFewPoints("empty patch has no covering radius")
    if resolution is None:
        resolution = min_separation(patch) / 4 if len(patch) > 1 else patch.region.widths().min() / 100
    tree = cKDTree(patch.points)
    region = patch.region

    def scan(m):
        lo, hi = region.lo + m, region.hi - m
        if np.any(hi <= lo):
            raise RegionTooThin(f"margin {m:.6g} exhausts the region")
        axes = [np.linspace(a, b, max(2, int(math.ceil((b - a) / resolution)) + 1)) for a, b in zip(lo, hi)]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        d, _ = tree.query(grid)
        return float(d.max())

    if margin is not None:
        return scan(margin)
    m = 0.0
    for _ in range(20):
        r = scan(m)
        if r <= m:
            return r
        m = r
    return r


def is_relatively_dense(patch: PointPatch, R: float, **kw) -> bool:
    return covering_radius(patch, **kw) <= R


def _interior_mask(patch: PointPatch, r: float) -> np.ndarray:
    """Points x for which every y with ``d(e, x^-1 y) <= r`` lies in the region."""
    region = patch.region
    pts = patch.points
    if isinstance(region, Box):
        inner = region.lo + r, region.hi - r
        if np.any(inner[1] < inner[0]):
            raise MarginTooSmall(f"region is narrower than twice the radius {r}")
        return np.all((pts >= inner[0]) & (pts <= inner[1]), axis=1)
    t = region.t
    if region.family == "heis_box":
        if t < r:
            raise MarginTooSmall(f"Heisenberg region t={t} is smaller than radius {r}")
        # x u with |u| <= r: |x_x + u_x| <= t, |x_z + u_z + x_x u_y| <= t^2
        return (
            (np.abs(pts[:, 0]) <= t - r)
            & (np.abs(pts[:, 1]) <= t - r)
            & (np.abs(pts[:, 2]) + r * r + np.abs(pts[:, 0]) * r <= t * t)
        )
    if region.family == "hyp_ball":
        # ||x h||_F <= ||x||_F ||h||_F <= ||x||_F (sqrt(2) + r)
        lim = math.sqrt(2 * math.cosh(t)) / (math.sqrt(2) + r)
        mask = np.linalg.norm(pts, axis=1) <= lim
        if not mask.any():
            raise MarginTooSmall(f"no SL2 point of F_{t} has a full radius-{r} neighbourhood")
        return mask
    raise ConfigError(f"unknown region family {region.family!r}")


def _dedup_sorted(points: np.ndarray, exact: np.ndarray | None):
    if len(points) == 0:
        return points, exact
    if exact is not None:
        flat = exact.reshape(len(exact), -1)
        _, idx = np.unique(flat, axis=0, return_index=True)
        return points[idx], exact[idx]
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > DEDUP_TOL, axis=1)
    return pts[keep], None


def difference_set(patch: PointPatch, radius: float) -> PointPatch:
    """Distinct ``x^-1 y`` with ``d(e, x^-1 y) <= radius``.

    x runs over points whose radius-neighbourhood lies inside the region, so
    every such difference is seen with its full set of partners.
    """
    if radius < 0:
        raise ConfigError("radius must be non-negative")
    law = patch.law
    outer = np.flatnonzero(_interior_mask(patch, radius))
    region = Box.cube(radius, law.dim) if patch.is_euclidean else GroupRegion("difference", float(radius))
    if len(outer) == 0:
        return PointPatch(np.zeros((0, law.dim)), region, law)
    diffs, exact = [], []
    if patch.is_euclidean and patch.exact is None:
        tree = cKDTree(patch.points)
        for i, js in zip(outer, tree.query_ball_point(patch.points[outer], radius)):
            diffs.append(patch.points[js] - patch.points[i])
    else:
        for i, js in _group_pairs(patch, outer, radius):
            if patch.exact is not None:
                e = law.mul_exact(law.inv_exact(patch.exact[i])[None], patch.exact[js])
                exact.append(e)
                diffs.append(zsqrt2.to_float(e))
            else:
                diffs.append(law.mul(law.inv(patch.points[i]), patch.points[js]))
    pts = np.concatenate(diffs).reshape(-1, law.dim)
    ex = np.concatenate(exact) if exact else None
    if ex is not None:
        keep = law.norm(pts) <= radius
        pts, ex = pts[keep], ex[keep]
    pts, ex = _dedup_sorted(pts, ex)
    return PointPatch(pts, region, law, ex, {"radius": radius, "outer_points": int(len(outer))})


def _closest_pair(points: np.ndarray):
    if len(points) < 2:
        return math.inf, None
    if points.shape[1] == 1:
        v = np.sort(points[:, 0])
        gaps = np.diff(v)
        k = int(np.argmin(gaps))
        return float(gaps[k]), [[float(v[k])], [float(v[k + 1])]]
    d, idx = cKDTree(points).query(points, k=2)
    k = int(np.argmin(d[:, 1]))
    return float(d[k, 1]), [points[k].tolist(), points[idx[k, 1]].tolist()]


def flc_check(patch: PointPatch, radius: float) -> dict:
    """FLC evidence: the difference set within ``radius`` is finite and separated.

    Separation is measured in coordinates (an accumulation point of
    differences shows up as two of them closer than 1e-9).
    """
    D = difference_set(patch, radius)
    sep, pair = _closest_pair(D.points)
    if sep <= ACCUMULATION_TOL:
        return _report("flc", "Violation", {"accumulation_pair": pair, "distance": sep}, radius=radius, count=len(D))
    return _report("flc", "FLC_Evidence", None, radius=radius, count=len(D), min_separation=sep)


def difference_growth(patch: PointPatch, radius: float, fractions=(0.25, 0.5, 1.0), ratio_tol: float = 1.1) -> dict:
    """Distinct-difference counts on nested central sub-patches.

    For a set with FLC the counts saturate once the sub-patch is large; for
    a random scatter they keep growing with the patch size.
    """
    if not isinstance(patch.region, Box):
        raise UnsupportedWindowGeometry("nested sub-patches need a box region")
    c = 0.5 * (patch.region.lo + patch.region.hi)
    half = 0.5 * patch.region.widths()
    counts = []
    for fr in fractions:
        sub = patch.restrict(Box(c - fr * half, c + fr * half))
        try:
            counts.append(len(difference_set(sub, radius)))
        except MarginTooSmall:
            counts.append(None)
    usable = [k for k in counts if k is not None]
    growth = usable[-1] / usable[-2] if len(usable) >= 2 and usable[-2] else math.inf
    verdict = "Saturated" if growth <= ratio_tol else "Growing"
    return _report("difference_growth", verdict, None, radius=radius, fractions=list(fractions), counts=counts, last_ratio=growth)


def in_doubled_window(window, D: PointPatch) -> np.ndarray:
    """Exact test that every difference has its star image in ``W - W``.

    Needs exact Z[√2] coordinates on ``D`` (one-dimensional schemes).
    """
    if D.exact is None:
        raise UnsupportedWindowGeometry("doubled-window check needs exact coordinates")
    pairs = zsqrt2.conj_pairs(D.exact.reshape(-1, 2))
    ivs = window.intervals()
    mask = np.zeros(len(pairs), dtype=bool)
    for lo1, hi1 in ivs:
        for lo2, hi2 in ivs:
            mask |= zsqrt2.in_interval(pairs[:, 0], pairs[:, 1], lo1 - hi2, hi1 - lo2)
    return mask


def _max_in_box(points: np.ndarray, sizes: np.ndarray) -> int:
    """Largest number of points in a closed translate of ``prod [0, sizes_k]``."""
    if len(points) == 0:
        return 0
    if points.shape[1] == 1:
        v = np.sort(points[:, 0])
        ends = np.searchsorted(v, v + sizes[0] * (1 + 1e-15) + 1e-15, side="right")
        return int((ends - np.arange(len(v))).max())
    # some optimal box has its lower face on axis 0 at a point coordinate
    order = np.argsort(points[:, 0], kind="stable")
    v = points[order, 0]
    best = 0
    for start in np.unique(v):
        lo = np.searchsorted(v, start, side="left")
        hi = np.searchsorted(v, start + sizes[0] * (1 + 1e-15) + 1e-15, side="right")
        if hi - lo <= best:
            continue
        best = max(best, _max_in_box(points[order[lo:hi], 1:], sizes[1:]))
    return best


def local_finiteness_profile(patch: PointPatch, K_sizes) -> list[int]:
    """``sup_g |P ∩ (g + K)|`` for closed boxes K with the given side lengths."""
    if not patch.is_euclidean:
        raise UnsupportedWindowGeometry("local finiteness profile is implemented for Euclidean patches")
    out = []
    for s in K_sizes:
        sizes = np.broadcast_to(np.asarray(s, dtype=float), (patch.dim,))
        if np.any(sizes < 0):
            raise ConfigError("box sides must be non-negative")
        out.append(_max_in_box(patch.points, sizes))
    return out


def delone_report(patch: PointPatch, r: float | None = None, R: float | None = None) -> dict:
    sep = min_separation(patch)
    cov = covering_radius(patch) if patch.is_euclidean else None
    r = sep if r is None else r
    ok_r = sep >= r
    ok_R = cov is None or R is None or cov <= R
    verdict = "Delone" if (sep > 0 and ok_r and ok_R) else "NotDelone"
    return _report("delone", verdict, None, min_separation=sep, covering_radius=cov, r=r, R=R, count=len(patch))
