"""Euclidean cut-and-project schemes and their model sets.

A scheme is a lattice ``Γ = B Z^n`` in ``R^d x R^m`` (n = d + m) whose first
d rows are the physical coordinates and whose last m rows are internal
coordinates. The model set of a window ``W`` is the set of physical parts of
lattice points whose internal part lies in ``W``.

Schemes with ``exact_form="zsqrt2"`` are the embedding of Z[√2] into R x R by
``a + b√2 -> (a + b√2, a - b√2)``; for them membership and regularity are
decided in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import zsqrt2
from .grouplaw import EuclideanLaw
from .errors import (
    CutoffTooSmall,
    ConfigError,
    NotALatticeProjection,
    RegionTooLarge,
    SingularBasis,
    ZeroMeasureWindow,
)
from .patch import Box, PointPatch
from .windows import Window

DEFAULT_BUDGET = 10_000_000
FLOAT_TOL = 1e-9

ZSQRT2_BASIS = np.array([[1.0, zsqrt2.SQRT2], [1.0, -zsqrt2.SQRT2]])


class EuclideanScheme:
    def __init__(self, d: int, m: int, basis, exact_form: str | None = None):
        self.d = int(d)
        self.m = int(m)
        basis = np.asarray(basis, dtype=float)
        n = self.d + self.m
        if self.d <= 0 or self.m <= 0:
            raise ConfigError("physical and internal dimensions must be positive")
        if basis.shape != (n, n):
            raise ConfigError(f"basis must be {n}x{n}, got {basis.shape}")
        if exact_form is not None:
            if exact_form != "zsqrt2":
                raise ConfigError(f"unknown exact_form {exact_form!r}")
            if (self.d, self.m) != (1, 1) or not np.allclose(basis, ZSQRT2_BASIS, atol=1e-9):
                raise ConfigError("exact_form 'zsqrt2' needs d = m = 1 and basis [[1, √2], [1, -√2]]")
            basis = ZSQRT2_BASIS.copy()
        det = float(np.linalg.det(basis))
        if not abs(det) > 1e-12 * max(1.0, np.abs(basis).max() ** n):
            raise SingularBasis(f"lattice basis is singular (det = {det})")
        self.basis = basis
        self.exact_form = exact_form
        self.inverse = np.linalg.inv(basis)

    @classmethod
    def zsqrt2(cls) -> EuclideanScheme:
        return cls(1, 1, ZSQRT2_BASIS, exact_form="zsqrt2")

    @property
    def n(self) -> int:
        return self.d + self.m

    @property
    def is_exact(self) -> bool:
        return self.exact_form == "zsqrt2"

    def __repr__(self):
        return f"EuclideanScheme(d={self.d}, m={self.m}, exact_form={self.exact_form!r})"

    def to_dict(self) -> dict:
        out = {"type": "euclidean", "d": self.d, "m": self.m, "basis": self.basis.tolist()}
        if self.exact_form:
            out["exact_form"] = self.exact_form
        return out

    # -- lattice points --------------------------------------------------

    def physical(self, coords) -> np.ndarray:
        coords = np.asarray(coords).reshape(-1, self.n)
        if self.is_exact:
            return zsqrt2.to_float(coords).reshape(-1, 1)
        return coords @ self.basis[: self.d].T

    def internal(self, coords) -> np.ndarray:
        coords = np.asarray(coords).reshape(-1, self.n)
        if self.is_exact:
            return zsqrt2.to_float_conj(coords).reshape(-1, 1)
        return coords @ self.basis[self.d :].T

    def lattice_coords(self, phys: Box, internal: Box, budget: int = DEFAULT_BUDGET) -> np.ndarray:
        """Integer coordinates of all lattice points in ``phys x internal``.

        For exact schemes the box bounds are read as rationals and the test is
        exact; otherwise closed float comparisons are used.
        """
        if self.is_exact:
            est = (phys.volume() + 2) * (internal.volume() + 2) / self.covolume()
            if est > budget:
                raise RegionTooLarge(f"about {est:.3g} lattice points requested, budget {budget}")
            return zsqrt2.enumerate_1d(phys.lo[0], phys.hi[0], internal.lo[0], internal.hi[0], exact=True)
        lo = np.concatenate([phys.lo, internal.lo])
        hi = np.concatenate([phys.hi, internal.hi])
        return lattice_coords_in_box(self.basis, lo, hi, budget)

    def covolume(self) -> float:
        if self.is_exact:
            return 2 * zsqrt2.SQRT2
        det = abs(float(np.linalg.det(self.basis)))
        if det == 0:
            raise SingularBasis("lattice basis is singular")
        return det

    def star_map(self, x, internal_bound: float = 1e3, tol: float = FLOAT_TOL):
        """Internal part of the lattice point whose physical part is ``x``.

        ``x`` may be a :class:`~modelset.zsqrt2.ZSqrt2` for exact schemes, in
        which case the answer is its Galois conjugate. Float inputs are matched
        against lattice points with internal part bounded by ``internal_bound``.
        """
        if isinstance(x, zsqrt2.ZSqrt2):
            if not self.is_exact:
                raise NotALatticeProjection("exact input needs an exact scheme")
            return x.conj()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.d,):
            raise NotALatticeProjection(f"expected a physical point of dimension {self.d}")
        phys = Box(x - tol, x + tol)
        coords = self.lattice_coords(phys, Box.cube(internal_bound, self.m))
        if len(coords) == 0:
            raise NotALatticeProjection(f"{x.tolist()} is not the physical part of a lattice point")
        err = np.linalg.norm(self.physical(coords) - x, axis=1)
        best = coords[np.argmin(err)]
        return self.internal(best)[0]

    def lattice_point_from_physical(self, x, internal_bound: float = 1e3, tol: float = FLOAT_TOL) -> np.ndarray:
        """Integer coordinates of the lattice point with physical part ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        coords = self.lattice_coords(Box(x - tol, x + tol), Box.cube(internal_bound, self.m))
        if len(coords) == 0:
            raise NotALatticeProjection(f"{x.tolist()} is not the physical part of a lattice point")
        err = np.linalg.norm(self.physical(coords) - x, axis=1)
        return coords[np.argmin(err)]

    # -- desk-scale evidence for the scheme axioms --------------------------

    def injectivity_evidence(self, radius: float, tol: float = FLOAT_TOL) -> dict:
        """Look for nonzero lattice points with vanishing physical part."""
        coords = self.lattice_coords(Box.cube(tol, self.d), Box.cube(radius, self.m))
        nonzero = [c.tolist() for c in coords if np.any(c != 0)]
        return {"check": "injectivity", "radius": radius, "violations": nonzero, "verdict": not nonzero}

    def internal_density_report(self, phys_radius: float, reference: Box, resolution: float = 0.05) -> dict:
        """Largest hole left by internal parts of lattice points in ``reference``.

        Only the physical ball of ``phys_radius`` is searched, so the number
        reported is evidence for denseness of the internal projection, not proof.
        """
        coords = self.lattice_coords(Box.cube(phys_radius, self.d), reference)
        pts = self.internal(coords)
        if len(pts) == 0:
            return {"check": "internal_density", "points": 0, "epsilon": math.inf}

        axes = [np.arange(lo, hi + resolution / 2, resolution) for lo, hi in zip(reference.lo, reference.hi)]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        eps, _ = cKDTree(pts).query(grid)
        return {
            "check": "internal_density",
            "phys_radius": phys_radius,
            "points": int(len(pts)),
            "epsilon": float(eps.max()),
            "resolution": resolution,
        }


def lattice_coords_in_box(basis, lo, hi, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All integer vectors ``k`` with ``lo <= basis @ k <= hi`` (closed, float).

    The search box for every coordinate comes from interval arithmetic with
    ``basis^-1``; the last (widest) coordinate is solved directly from the row
    constraints for each prefix, so only the prefixes are enumerated.
    """
    basis = np.asarray(basis, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = basis.shape[0]
    inv = np.linalg.inv(basis)
    r_lo = np.minimum(inv * lo, inv * hi).sum(axis=1)
    r_hi = np.maximum(inv * lo, inv * hi).sum(axis=1)
    ilo = np.floor(r_lo - 1e-9).astype(np.int64)
    ihi = np.ceil(r_hi + 1e-9).astype(np.int64)
    sizes = ihi - ilo + 1
    last = int(np.argmax(sizes))
    rest = [i for i in range(n) if i != last]
    n_prefix = int(np.prod(sizes[rest])) if rest else 1
    if n_prefix > budget:
        raise RegionTooLarge(f"{n_prefix} search prefixes exceed budget {budget}")

    if rest:
        grids = np.meshgrid(*[np.arange(ilo[i], ihi[i] + 1) for i in rest], indexing="ij")
        prefix = np.stack([g.ravel() for g in grids], axis=1)
    else:
        prefix = np.zeros((1, 0), dtype=np.int64)
    partial = prefix @ basis[:, rest].T if rest else np.zeros((1, n))
    col = basis[:, last]

    k_lo = np.full(len(prefix), float(ilo[last]))
    k_hi = np.full(len(prefix), float(ihi[last]))
    alive = np.ones(len(prefix), dtype=bool)
    for r in range(n):
        c = col[r]
        if c > 0:
            k_lo = np.maximum(k_lo, (lo[r] - partial[:, r]) / c)
            k_hi = np.minimum(k_hi, (hi[r] - partial[:, r]) / c)
        elif c < 0:
            k_lo = np.maximum(k_lo, (hi[r] - partial[:, r]) / c)
            k_hi = np.minimum(k_hi, (lo[r] - partial[:, r]) / c)
        else:
            alive &= (partial[:, r] >= lo[r] - 1e-12) & (partial[:, r] <= hi[r] + 1e-12)
    k_lo = np.ceil(k_lo - 1e-9).astype(np.int64)
    k_hi = np.floor(k_hi + 1e-9).astype(np.int64)
    count = np.where(alive, np.maximum(k_hi - k_lo + 1, 0), 0)
    total = int(count.sum())
    if total > budget:
        raise RegionTooLarge(f"{total} candidate lattice points exceed budget {budget}")
    keep = count > 0
    prefix, k_lo, count = prefix[keep], k_lo[keep], count[keep]
    ks = np.repeat(k_lo, count) + (np.arange(total) - np.repeat(np.cumsum(count) - count, count))
    out = np.empty((total, n), dtype=np.int64)
    if rest:
        out[:, rest] = np.repeat(prefix, count, axis=0)
    out[:, last] = ks
    vals = out @ basis.T
    mask = np.all((vals >= lo) & (vals <= hi), axis=1)
    return out[mask]


# -- model sets ---------------------------------------------------------------


def enumerate_model_set(scheme: EuclideanScheme, window: Window, region: Box, budget: int = DEFAULT_BUDGET) -> PointPatch:
    """Physical parts of lattice points with internal part in ``window`` inside ``region``."""
    if region.dim != scheme.d:
        raise ConfigError(f"region has dimension {region.dim}, scheme has d = {scheme.d}")
    if window.m != scheme.m:
        raise ConfigError("window dimension does not match the scheme")
    if window.is_empty():
        empty = np.zeros((0, 1, 2), dtype=np.int64) if scheme.is_exact else None
        return PointPatch(np.zeros((0, scheme.d)), region, exact=empty)
    wlo, whi = window.bounding_box()
    coords = scheme.lattice_coords(region, Box(wlo, whi), budget)
    if scheme.is_exact:
        inner = np.stack([coords[:, 0], -coords[:, 1]], axis=1)
        coords = coords[window.contains_exact(inner)]
        return PointPatch(scheme.physical(coords), region, exact=coords.reshape(-1, 1, 2))
    coords = coords[window.contains(scheme.internal(coords))]
    patch = PointPatch(scheme.physical(coords), region)
    patch.meta["lattice_coords"] = coords
    return patch


@dataclass
class RegularityResult:
    verdict: str  # "Regular" | "BoundaryHit" | "Inconclusive"
    witness: dict | None = None
    min_distance: float | None = None
    exact: bool = False
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "check": "regularity",
            "verdict": self.verdict,
            "witness": self.witness,
            "min_distance": self.min_distance,
            "exact": self.exact,
            "reason": self.reason,
        }


def check_gamma_regular(
    scheme: EuclideanScheme,
    window: Window,
    search_radius: float,
    tol: float = FLOAT_TOL,
    margin: float = 10.0,
    budget: int = DEFAULT_BUDGET,
) -> RegularityResult:
    """Search for lattice points whose internal part lies on the window boundary.

    Only lattice points with physical part in the ball of ``search_radius`` are
    examined. Exact schemes decide boundary membership exactly; float schemes
    report ``Inconclusive`` when the closest internal part is within
    ``margin * tol`` of the boundary but not within ``tol``.
    """
    if search_radius <= 0:
        raise ConfigError("search_radius must be positive")
    phys = Box.cube(search_radius, scheme.d)
    if scheme.is_exact:
        hits = []
        for q in sorted({e for iv in window.intervals() for e in iv}):
            c = zsqrt2.enumerate_1d(-search_radius, search_radius, q, q, exact=True)
            c = c[np.abs(scheme.physical(c)[:, 0]) <= search_radius]
            for x in c:
                xp = float(scheme.physical(x)[0, 0])
                hits.append((abs(xp), xp < 0, tuple(int(v) for v in x), q))
        if hits:
            _, _, coords, q = min(hits)
            coords = np.array(coords)
            return RegularityResult(
                "BoundaryHit",
                witness={
                    "lattice_coords": coords.tolist(),
                    "physical": scheme.physical(coords)[0].tolist(),
                    "internal": scheme.internal(coords)[0].tolist(),
                    "boundary_point": str(Fraction(q)),
                },
                min_distance=0.0,
                exact=True,
            )
        wlo, whi = window.bounding_box()
        try:
            coords = scheme.lattice_coords(phys, Box(wlo - 1, whi + 1), budget)
            dmin = float(window.boundary_distance(scheme.internal(coords)).min()) if len(coords) else None
        except RegionTooLarge:
            dmin = None
        return RegularityResult("Regular", min_distance=dmin, exact=True)

    wlo, whi = window.bounding_box()
    slack = margin * tol
    try:
        coords = scheme.lattice_coords(phys, Box(wlo - slack, whi + slack), budget)
    except RegionTooLarge as exc:
        return RegularityResult("Inconclusive", reason=str(exc))
    coords = coords[np.linalg.norm(scheme.physical(coords), axis=1) <= search_radius]
    if len(coords) == 0:
        return RegularityResult("Regular", min_distance=None, reason="no lattice points near the window")
    dist = np.abs(window.boundary_distance(scheme.internal(coords)))
    phys = scheme.physical(coords)
    # closest to the boundary first, then closest to the origin, positive first
    i = int(np.lexsort([phys[:, 0] < 0, np.linalg.norm(phys, axis=1), dist])[0])
    witness = {
        "lattice_coords": coords[i].tolist(),
        "physical": scheme.physical(coords[i])[0].tolist(),
        "internal": scheme.internal(coords[i])[0].tolist(),
    }
    dmin = float(dist[i])
    if dmin <= tol:
        return RegularityResult("BoundaryHit", witness=witness, min_distance=dmin)
    if dmin > slack:
        return RegularityResult("Regular", min_distance=dmin)
    return RegularityResult("Inconclusive", witness=witness, min_distance=dmin, reason="boundary distance within margin")


def covolume(scheme: EuclideanScheme) -> float:
    return scheme.covolume()


def model_set_covolume(scheme: EuclideanScheme, window: Window) -> float:
    mw = window.measure()
    if mw <= 0:
        raise ZeroMeasureWindow("window has zero measure")
    return scheme.covolume() / mw


def predicted_density(scheme: EuclideanScheme, window: Window) -> float:
    mw = window.measure()
    if mw <= 0:
        raise ZeroMeasureWindow("window has zero measure")
    return mw / scheme.covolume()


# -- torus parametrisation -------------------------------------------------------


@dataclass(frozen=True)
class TorusPoint:
    """A point of ``(R^d x R^m)/Γ`` given by its reduced representative."""

    coords: np.ndarray  # lattice coordinates in [0, 1)^n
    rep: np.ndarray  # basis @ coords
    d: int

    @property
    def physical(self) -> np.ndarray:
        return self.rep[: self.d]

    @property
    def internal(self) -> np.ndarray:
        return self.rep[self.d :]


def reduce_mod_lattice(scheme: EuclideanScheme, v) -> TorusPoint:
    """Reduce ``v`` into the half-open fundamental parallelepiped of the basis."""
    v = np.asarray(v, dtype=float).reshape(scheme.n)
    c = scheme.inverse @ v
    frac = c - np.floor(c)
    # ties at the upper face go to 0
    frac[(frac >= 1.0 - 1e-12) | (np.abs(frac) < 1e-15)] = 0.0
    return TorusPoint(frac, scheme.basis @ frac, scheme.d)


def torus_parametrize(scheme: EuclideanScheme, g) -> TorusPoint:
    """Parameter of the translate ``g + P0``: the class of ``(g, 0)``."""
    g = np.atleast_1d(np.asarray(g, dtype=float))
    return reduce_mod_lattice(scheme, np.concatenate([g, np.zeros(scheme.m)]))


def periodization_on_torus(
    scheme: EuclideanScheme,
    f,
    window: Window,
    y: TorusPoint,
    cutoff: float,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Lattice periodisation of ``f ⊗ 1_W`` evaluated at ``y``.

    Sums ``f(y_phys + γ_G)`` over lattice points γ with ``y_int + γ_H`` in the
    window and ``y_phys + γ_G`` in the cube of side ``2 cutoff``.
    """
    slo, shi = f.support_box()
    if np.any(slo < -cutoff) or np.any(shi > cutoff):
        raise CutoffTooSmall(f"support of f is not inside the cutoff cube of radius {cutoff}")
    if window.is_empty():
        return 0.0
    wlo, whi = window.bounding_box()
    yp, yi = y.physical, y.internal
    coords = scheme.lattice_coords(Box(slo - yp, shi - yp), Box(wlo - yi, whi - yi), budget)
    if len(coords) == 0:
        return 0.0
    inside = window.contains(yi + scheme.internal(coords))
    x = yp + scheme.physical(coords[inside])
    vals = f(x)
    return math.fsum(vals[np.lexsort(x.T[::-1])])


class ModelSet:
    """A Euclidean model set ``P0(scheme, window)`` with a region-based enumerator."""

    def __init__(self, scheme: EuclideanScheme, window: Window, budget: int = DEFAULT_BUDGET):
        if window.m != scheme.m:
            raise ConfigError("window dimension does not match the scheme")
        self.scheme = scheme
        self.window = window
        self.budget = budget

    @property
    def d(self) -> int:
        return self.scheme.d

    @property
    def law(self) -> EuclideanLaw:
        return EuclideanLaw(self.scheme.d)

    def patch(self, region: Box) -> PointPatch:
        return enumerate_model_set(self.scheme, self.window, region, self.budget)

    def density(self) -> float:
        return predicted_density(self.scheme, self.window)

    def periodize(self, f, g) -> float:
        """Direct periodisation ``sum_{x in g + P0} f(x)``."""
        g = np.atleast_1d(np.asarray(g, dtype=float))
        slo, shi = f.support_box()
        patch = self.patch(Box(slo - g, shi - g))
        x = patch.points + g
        vals = f(x)
        return math.fsum(vals[np.lexsort(x.T[::-1])]) if len(x) else 0.0
