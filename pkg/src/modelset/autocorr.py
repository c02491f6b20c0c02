"""Auto-correlation of model sets: empirical averages and the lattice formula.

The empirical side is the averaged double sum

    sigma_t(f) = 1/vol(F_t) * sum_{x in P0 ∩ F_t} sum_{y in P0} f(x^-1 y),

computed exactly over enumerated points. The theoretical side, for Euclidean
schemes, is the pure point measure with an atom at every physical part z of
a lattice point, weighted by ``m(W ∩ (W - z*)) / covol(Γ)``. That weight comes
from unfolding ``||P_Γ(f ⊗ 1_W)||^2`` over Γ; it is checked against
sigma_t in the test-suite before being relied on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from . import zsqrt2
from .errors import ConfigError, QuadratureFailure, UnsupportedWindowGeometry
from .grouplaw import EuclideanLaw, SL2Law
from .groups import AveragingSequence, sl2_exp
from .patch import Box, LatticeSet, PointPatch
from .scheme import DEFAULT_BUDGET, EuclideanScheme
from .windows import Window

PROFILES = ("tent", "truncated-gaussian")


class TestFunction:
    """Compactly supported radial bump ``f(g) = amp * profile(|center^-1 g| / width)``.

    ``|.|`` is the norm of the group law: Euclidean norm on R^d, the quasi-norm
    on the Heisenberg group and Frobenius distance to I on SL2.
    """

    __test__ = False  # not a pytest class

    def __init__(self, profile: str = "tent", center=0.0, width: float = 1.0, law=None, amplitude: float = 1.0):
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}")
        if width <= 0:
            raise ConfigError("width must be positive")
        self.profile = profile
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width)
        self.law = law if law is not None else EuclideanLaw(len(self.center))
        self.amplitude = float(amplitude)

    def __repr__(self):
        return f"TestFunction({self.profile!r}, center={self.center.tolist()}, width={self.width})"

    def displacement(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float).reshape(-1, self.law.dim)
        if isinstance(self.law, EuclideanLaw):
            return np.linalg.norm(g - self.center, axis=1)
        return self.law.norm(self.law.mul(self.law.inv(self.center), g))

    def _shape(self, r):
        u = r / self.width
        if self.profile == "tent":
            return np.maximum(0.0, 1.0 - u)
        s = 2.0  # width = 2 standard deviations
        floor = math.exp(-0.5 * s * s)
        return np.where(u < 1, (np.exp(-0.5 * (s * u) ** 2) - floor) / (1 - floor), 0.0)

    def __call__(self, g) -> np.ndarray:
        return self.amplitude * self._shape(self.displacement(g))

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the support (Euclidean instances)."""
        return self.center - self.width, self.center + self.width

    def reach(self) -> float:
        """Radius around ``center`` in coordinates containing the support."""
        if isinstance(self.law, SL2Law):
            return float(np.linalg.norm(self.center)) * self.width
        return self.width

    def to_dict(self):
        return {"profile": self.profile, "center": self.center.tolist(), "width": self.width}


@dataclass
class AtomicMeasure:
    locations: np.ndarray
    weights: np.ndarray
    cutoff: float
    exact: np.ndarray | None = None

    def __len__(self):
        return len(self.weights)

    def __call__(self, f) -> float:
        return math.fsum(self.weights * f(self.locations))

    def weight_at(self, z, tol: float = 1e-9) -> float:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        dist = np.linalg.norm(self.locations - z, axis=1)
        i = int(np.argmin(dist)) if len(dist) else -1
        return float(self.weights[i]) if i >= 0 and dist[i] <= tol else 0.0

    def nearest(self, k: int) -> AtomicMeasure:
        """The k atoms closest to the identity (ties broken by coordinates)."""
        r = np.linalg.norm(self.locations, axis=1)
        order = np.lexsort(list(self.locations.T[::-1]) + [r])[:k]
        exact = None if self.exact is None else self.exact[order]
        return AtomicMeasure(self.locations[order], self.weights[order], self.cutoff, exact)

    def with_weight(self, index: int, value: float) -> AtomicMeasure:
        w = self.weights.copy()
        w[index] = value
        return AtomicMeasure(self.locations.copy(), w, self.cutoff, self.exact)

    def to_dict(self) -> dict:
        return {
            "atoms": [{"loc": loc.tolist(), "weight": float(w)} for loc, w in zip(self.locations, self.weights)],
            "cutoff": self.cutoff,
        }


@dataclass
class SigmaTrace:
    t_grid: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    volumes: np.ndarray
    header: dict = field(default_factory=dict)

    def rows(self):
        return [
            (float(t), int(c), float(v), float(s))
            for t, c, v, s in zip(self.t_grid, self.counts, self.volumes, self.values)
        ]


def _is_group_model(model) -> bool:
    return hasattr(model, "difference_candidates")


def _family_patch(model, seq: AveragingSequence, t: float, inflate: float = 0.0) -> PointPatch:
    if _is_group_model(model):
        return model.patch(t)
    return model.patch(Box.cube(t + inflate, model.d))


def sigma_t(model, seq: AveragingSequence, f: TestFunction, t_grid) -> SigmaTrace:
    """Averaged double sums ``sigma_t(f)`` for every t in ``t_grid``.

    The inner sum runs over all of P0, so P0 is enumerated on ``F_tmax``
    enlarged by the reach of ``f``. Group instances use exact products
    ``x h`` with ``h`` ranging over lattice elements near the centre of ``f``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid must be non-empty and strictly increasing")
    t_max = float(t_grid[-1])

    if _is_group_model(model):
        outer = model.patch(t_max)
        contrib = _group_contributions(model, outer, f)
        radius = seq.radius(outer.points)
        pts = outer.points
    else:
        reach = float(np.abs(f.center).max()) + f.width
        patch = model.patch(Box.cube(t_max + reach, model.d))
        pts = patch.points
        radius = seq.radius(pts)
        inside = radius <= t_max
        contrib = np.zeros(len(pts))
        if inside.any() and f.amplitude != 0:
            tree = cKDTree(pts)
            centers = pts[inside] + f.center
            neigh = tree.query_ball_point(centers, f.width + 1e-12, return_sorted=True)
            vals = np.zeros(inside.sum())
            for k, (x, idx) in enumerate(zip(pts[inside], neigh)):
                if idx:
                    vals[k] = math.fsum(f(pts[idx] - x))
            contrib[inside] = vals

    values, counts, volumes = [], [], []
    for t in t_grid:
        mask = seq.member(pts, t) if seq.family == "hyp_ball" else radius <= t
        vol = float(seq.volume(t))
        counts.append(int(mask.sum()))
        volumes.append(vol)
        values.append(math.fsum(contrib[mask]) / vol)
    return SigmaTrace(t_grid, np.array(values), np.array(counts), np.array(volumes), {"family": seq.family})


def _group_contributions(model, outer: PointPatch, f: TestFunction, chunk: int = 4096) -> np.ndarray:
    """``sum_{y in P0} f(x^-1 y)`` for every outer point x (exact group products)."""
    law = model.law
    contrib = np.zeros(len(outer))
    if f.amplitude == 0 or len(outer) == 0:
        return contrib
    H = model.difference_candidates(f.center, f.reach())
    if len(H) == 0:
        return contrib
    fh = f(zsqrt2.to_float(H))
    H = H[fh > 0]
    fh = fh[fh > 0]
    if len(H) == 0:
        return contrib
    X = outer.exact
    for s in range(0, len(X), max(1, chunk // max(1, len(H)))):
        xs = X[s : s + max(1, chunk // max(1, len(H)))]
        y = law.mul_exact(xs[:, None], H[None, :])
        n_x, n_h = y.shape[:2]
        ok = model.star_in_window(y.reshape(n_x * n_h, *y.shape[2:])).reshape(n_x, n_h)
        contrib[s : s + n_x] = [math.fsum(fh[row]) for row in ok]
    return contrib


def _positive_overlap_exact(window: Window, pairs: np.ndarray) -> np.ndarray:
    """Exact test ``m(W ∩ (W - s)) > 0`` for internal shifts given as pairs."""
    a, b = pairs[:, 0], pairs[:, 1]
    ivs = window.intervals()
    mask = np.zeros(len(pairs), dtype=bool)
    for lo_i, hi_i in ivs:
        for lo_j, hi_j in ivs:
            # [lo_i, hi_i] ∩ [lo_j - s, hi_j - s] has interior iff lo_j - hi_i < s < hi_j - lo_i
            mask |= (zsqrt2.compare_rational_array(a, b, lo_j - hi_i) > 0) & (
                zsqrt2.compare_rational_array(a, b, hi_j - lo_i) < 0
            )
    return mask


def theoretical_autocorrelation(
    scheme: EuclideanScheme, window: Window, cutoff: float, budget: int = DEFAULT_BUDGET
) -> AtomicMeasure:
    """Atoms at physical parts z of lattice points, ``|z| <= cutoff``,
    with weight ``m(W ∩ (W - z*)) / covol``; zero weights are dropped."""
    if not isinstance(window, Window):
        raise UnsupportedWindowGeometry(f"unsupported window {window!r}")
    if cutoff < 0:
        raise ConfigError("cutoff must be non-negative")
    dlo, dhi = window.difference_bounding_box()
    coords = scheme.lattice_coords(Box.cube(cutoff, scheme.d), Box(dlo, dhi), budget)
    phys = scheme.physical(coords)
    keep = np.linalg.norm(phys, axis=1) <= cutoff
    coords, phys = coords[keep], phys[keep]
    shift = scheme.internal(coords)
    overlap = window.overlap(shift)
    if scheme.is_exact:
        positive = _positive_overlap_exact(window, np.stack([coords[:, 0], -coords[:, 1]], axis=1))
    else:
        positive = overlap > 0
    coords, phys, overlap = coords[positive], phys[positive], overlap[positive]
    order = np.lexsort(phys.T[::-1])
    weights = overlap[order] / scheme.covolume()
    exact = coords[order].reshape(-1, 1, 2) if scheme.is_exact else None
    return AtomicMeasure(phys[order], weights, float(cutoff), exact)


def isolating_tents(measure: AtomicMeasure, k: int, shrink: float = 0.5) -> list[TestFunction]:
    """Tents centred on the k nearest atoms, each narrower than its gap to other atoms."""
    near = measure.nearest(k)
    out = []
    for z in near.locations:
        d = np.linalg.norm(measure.locations - z, axis=1)
        gap = d[d > 1e-12].min()
        out.append(TestFunction("tent", z, shrink * gap))
    return out


def convolution_star(f: TestFunction, g: TestFunction, z, epsabs: float = 1e-10) -> float:
    """``(f* ∗ g)(z) = ∫ f(u) g(z + u) du`` by adaptive quadrature (real f, d = 1)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if len(z) != 1:
        raise UnsupportedWindowGeometry("quadrature for convolutions is implemented for d = 1")
    lo = max(f.center[0] - f.width, g.center[0] - g.width - z[0])
    hi = min(f.center[0] + f.width, g.center[0] + g.width - z[0])
    if hi <= lo:
        return 0.0
    kinks = sorted({f.center[0], g.center[0] - z[0]} & set(np.clip([f.center[0], g.center[0] - z[0]], lo, hi)))
    kinks = [k for k in kinks if lo < k < hi]
    val, err = integrate.quad(
        lambda u: float(f(np.array([u]))[0] * g(np.array([z[0] + u]))[0]),
        lo,
        hi,
        points=kinks or None,
        epsabs=epsabs,
        limit=200,
    )
    if err > 100 * epsabs:
        raise QuadratureFailure(f"quadrature error {err:.3g} exceeds tolerance")
    return val


def positive_definiteness_gram(measure: AtomicMeasure, functions: list[TestFunction], rel_tol: float = 1e-8) -> dict:
    """Gram matrix ``M_ij = sum_z w(z) (f_i* ∗ f_j)(z)`` and its smallest eigenvalue."""
    n = len(functions)
    M = np.zeros((n, n))
    for i, fi in enumerate(functions):
        for j, fj in enumerate(functions):
            if j < i:
                M[i, j] = M[j, i]
                continue
            shift = fj.center - fi.center
            reach = fi.width + fj.width
            near = np.linalg.norm(measure.locations - shift, axis=1) <= reach
            terms = [w * convolution_star(fi, fj, z) for z, w in zip(measure.locations[near], measure.weights[near])]
            M[i, j] = math.fsum(terms)
    eig = np.linalg.eigvalsh(M)
    trace = float(np.trace(M))
    threshold = -rel_tol * abs(trace)
    return {
        "check": "positive_definiteness",
        "matrix": M.tolist(),
        "eigenvalues": eig.tolist(),
        "min_eigenvalue": float(eig[0]),
        "trace": trace,
        "threshold": threshold,
        "verdict": "PositiveDefinite" if eig[0] >= threshold else "NotPositiveDefinite",
    }


def density_bound_trace(model, seq: AveragingSequence, t_grid, ratio_tol: float = 1.1) -> dict:
    """``|P0 ∩ F_t| / vol(F_t)`` along ``t_grid``, with its running supremum."""
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid must be non-empty and strictly increasing")
    if hasattr(model, "count") and seq.family == "heis_box":
        # product window and product box: exact counts without materialising points
        counts = [model.count(t) for t in t_grid]
    else:
        patch = _family_patch(model, seq, float(t_grid[-1]))
        radius = seq.radius(patch.points)
        counts = []
        for t in t_grid:
            mask = seq.member(patch.points, t) if seq.family == "hyp_ball" else radius <= t
            counts.append(int(mask.sum()))
    ratios = [c / float(seq.volume(t)) for c, t in zip(counts, t_grid)]
    ratios = np.array(ratios)
    top = ratios[len(ratios) // 2 :]
    spread = float(top.max() / top.min()) if top.min() > 0 else math.inf
    return {
        "check": "density_bound",
        "t_grid": t_grid.tolist(),
        "counts": counts,
        "ratios": ratios.tolist(),
        "running_sup": np.maximum.accumulate(ratios).tolist(),
        "sup": float(ratios.max()),
        "top_half_spread": spread,
        "verdict": "Stable" if spread <= ratio_tol else "Unstable",
    }


def sl2_sigma_ratio(model, f1: TestFunction, f2: TestFunction, t_grid) -> dict:
    """Normalisation-free ratio ``sigma_t(f1) / sigma_t(f2)`` on SL2."""
    seq = AveragingSequence("hyp_ball")
    s1 = sigma_t(model, seq, f1, t_grid)
    s2 = sigma_t(model, seq, f2, t_grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s2.values > 0, s1.values / s2.values, np.nan)
    incr = np.abs(np.diff(ratio)) / np.where(ratio[1:] != 0, np.abs(ratio[1:]), 1.0)
    return {
        "check": "sl2_sigma_ratio",
        "t_grid": list(map(float, t_grid)),
        "counts": s1.counts.tolist(),
        "sigma_f1": s1.values.tolist(),
        "sigma_f2": s2.values.tolist(),
        "ratio": ratio.tolist(),
        "relative_increments": incr.tolist(),
        "header": "Haar measure normalised so vol(F_t) = 4π sinh²(t/2); only ratios are meaningful",
    }


def sl2_gap_function(model, width: float = 0.15, seed: int = 0, tries: int = 5000) -> TestFunction:
    """A tent near the identity whose support meets no candidate difference.

    Candidates are a superset of ``P0^-1 P0``, so sigma_t of the returned
    function is exactly zero for every t.
    """
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        c = sl2_exp(0.5 * rng.standard_normal((1, 3)))[0]
        f = TestFunction("tent", c, width, model.law)
        H = model.difference_candidates(c, f.reach())
        if len(H) == 0 or not np.any(f(zsqrt2.to_float(H)) > 0):
            return f
    raise ConfigError(f"no gap of width {width} found near the identity")


def compare_autocorrelation(model, n_atoms: int, T: float, tol: float = 0.05, cutoff: float = 20.0) -> dict:
    """sigma_T of atom-isolating tents against the theoretical atom weights."""
    measure = theoretical_autocorrelation(model.scheme, model.window, cutoff)
    tents = isolating_tents(measure, n_atoms)
    seq = AveragingSequence("box", model.d)
    rows = []
    for f in tents:
        emp = float(sigma_t(model, seq, f, [T]).values[0])
        theory = measure(f)
        rel = abs(emp - theory) / theory
        rows.append({"loc": f.center.tolist(), "width": f.width, "theory": theory, "empirical": emp, "rel_error": rel})
    passed = all(r["rel_error"] <= tol for r in rows)
    return {"check": "autocorrelation_compare", "T": T, "tol": tol, "atoms": rows, "verdict": "pass" if passed else "fail"}
