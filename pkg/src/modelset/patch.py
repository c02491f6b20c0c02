"""Finite point patches and the regions over which they are complete."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grouplaw import EuclideanLaw


@dataclass(frozen=True)
class Box:
    """Closed axis-parallel box ``[lo, hi]`` in R^d."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ConfigError("box bounds have different dimensions")
        if np.any(hi < lo):
            raise ConfigError(f"empty box: lo={lo.tolist()} hi={hi.tolist()}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_flat(cls, values) -> Box:
        """``[a1, b1, a2, b2, ...]`` -> box with per-axis bounds."""
        values = [float(v) for v in values]
        if len(values) % 2 or not values:
            raise ConfigError("region needs an even number of bounds a,b[,c,d...]")
        return cls(values[0::2], values[1::2])

    @classmethod
    def cube(cls, t: float, d: int = 1) -> Box:
        return cls(-t * np.ones(d), t * np.ones(d))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def contains_open(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def contains_box(self, other: Box) -> bool:
        return bool(np.all(other.lo >= self.lo) and np.all(other.hi <= self.hi))

    def inflate(self, r: float) -> Box:
        return Box(self.lo - r, self.hi + r)

    def deflate(self, r: float) -> Box:
        return Box(self.lo + r, np.maximum(self.hi - r, self.lo + r))

    def translate(self, v) -> Box:
        return Box(self.lo + v, self.hi + v)

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        return float(np.prod(self.widths()))

    def to_list(self) -> list[float]:
        return [float(x) for pair in zip(self.lo, self.hi) for x in pair]


@dataclass(frozen=True)
class GroupRegion:
    """Member ``F_t`` of an averaging family of a non-abelian instance."""

    family: str
    t: float

    def to_list(self):
        return [self.family, float(self.t)]


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Indices sorting rows lexicographically (first coordinate most significant)."""
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(points.T[::-1])


@dataclass
class PointPatch:
    """A finite piece of a point set, complete over ``region``.

    ``exact`` optionally carries Z[√2] integer coordinates of every point as
    an ``(n, k, 2)`` array, aligned with ``points``.
    """

    points: np.ndarray
    region: Box | GroupRegion
    law: object = None
    exact: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.law is None:
            if not isinstance(self.region, Box):
                raise ConfigError("non-Euclidean patches need an explicit group law")
            self.law = EuclideanLaw(self.region.dim)
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.law.dim)
        order = canonical_order(pts)
        self.points = pts[order]
        if self.exact is not None:
            self.exact = np.asarray(self.exact)[order]

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_euclidean(self) -> bool:
        return isinstance(self.law, EuclideanLaw)

    def restrict(self, box: Box) -> PointPatch:
        """Sub-patch inside ``box``; complete over the intersection of regions."""
        mask = box.contains(self.points)
        if isinstance(self.region, Box):
            lo = np.maximum(self.region.lo, box.lo)
            hi = np.maximum(np.minimum(self.region.hi, box.hi), lo)
            region = Box(lo, hi)
        else:
            region = box
        exact = None if self.exact is None else self.exact[mask]
        return PointPatch(self.points[mask], region, self.law, exact, dict(self.meta))

    def translate(self, t) -> PointPatch:
        """The patch ``t + P`` (Euclidean instances only)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return PointPatch(self.points + t, self.region.translate(t), self.law, None, dict(self.meta))


def lattice_patch(basis, region: Box) -> PointPatch:
    """Points of the plain lattice ``basis @ Z^d`` inside ``region``.

    This is the degenerate (trivial internal space) path: a lattice is not
    represented as a window-based scheme.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    d = basis.shape[0]
    if basis.shape != (d, d) or region.dim != d:
        raise ConfigError("lattice basis must be square and match the region dimension")
    inv = np.linalg.inv(basis)
    corners = np.array(np.meshgrid(*[[lo, hi] for lo, hi in zip(region.lo, region.hi)])).reshape(d, -1)
    coords = inv @ corners
    lo = np.floor(coords.min(axis=1) - 1e-9).astype(int)
    hi = np.ceil(coords.max(axis=1) + 1e-9).astype(int)
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
    n = np.stack([g.ravel() for g in grids], axis=0)
    pts = (basis @ n).T
    # snap integer lattices to exact values
    pts = np.where(np.abs(pts - np.round(pts)) < 1e-12, np.round(pts), pts)
    pts = pts[region.contains(pts)]
    return PointPatch(pts, region)


class LatticeSet:
    """A plain lattice ``basis @ Z^d`` exposed through the model-set interface."""

    def __init__(self, basis):
        self.basis = np.atleast_2d(np.asarray(basis, dtype=float))
        self.d = self.basis.shape[0]
        self.law = EuclideanLaw(self.d)

    def patch(self, region: Box) -> PointPatch:
        return lattice_patch(self.basis, region)

    def density(self) -> float:
        return 1.0 / abs(float(np.linalg.det(self.basis)))
