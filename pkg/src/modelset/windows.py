"""Compact windows in the internal space R^m.

Three geometry classes are supported: centred axis boxes, Euclidean balls and
(for m = 1) finite unions of disjoint closed intervals. For each of them the
measure, the distance to the boundary and the overlap volume
``m(W ∩ (W - s))`` are available in closed form.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import special

from . import zsqrt2
from .errors import ConfigError, UnsupportedWindowGeometry


def _rows(y, m):
    y = np.asarray(y, dtype=float)
    return y.reshape(-1, m)


class Window:
    """Base class; subclasses implement the geometry."""

    kind = "abstract"
    m: int

    def contains(self, y) -> np.ndarray:
        raise NotImplementedError

    def measure(self) -> float:
        raise NotImplementedError

    def boundary_distance(self, y) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def overlap(self, s) -> np.ndarray:
        """Measure of ``W ∩ (W - s)`` for each row of ``s``."""
        raise NotImplementedError

    def translated(self, v) -> Window:
        raise NotImplementedError

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        """Exact rational endpoints (only for one-dimensional windows)."""
        raise UnsupportedWindowGeometry(f"{self.kind} window has no interval form")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def is_empty(self) -> bool:
        return self.measure() <= 0

    def is_aperiodic(self) -> bool:
        # a nonempty compact subset of R^m has trivial translation stabiliser
        return not self.is_empty()

    def difference_bounding_box(self):
        lo, hi = self.bounding_box()
        return lo - hi, hi - lo

    def contains_exact(self, pairs: np.ndarray) -> np.ndarray:
        """Exact membership of internal values given as Z[√2] pairs (m = 1)."""
        pairs = np.asarray(pairs).reshape(-1, 2)
        mask = np.zeros(len(pairs), dtype=bool)
        for lo, hi in self.intervals():
            mask |= zsqrt2.in_interval(pairs[:, 0], pairs[:, 1], lo, hi)
        return mask

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class BoxWindow(Window):
    kind = "box"

    def __init__(self, half_widths, center=None):
        self.half_widths = np.atleast_1d(np.asarray(half_widths, dtype=float))
        self.m = len(self.half_widths)
        if center is None:
            center = np.zeros(self.m)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        if self.center.shape != self.half_widths.shape:
            raise ConfigError("box center and half_widths differ in length")
        if np.any(self.half_widths < 0):
            raise ConfigError("negative half width")
        self._raw = (list(np.atleast_1d(half_widths)), None if center is None else list(np.atleast_1d(center)))

    def contains(self, y):
        y = _rows(y, self.m)
        return np.all(np.abs(y - self.center) <= self.half_widths, axis=1)

    def measure(self):
        return float(np.prod(2 * self.half_widths))

    def boundary_distance(self, y):
        y = _rows(y, self.m)
        rel = np.abs(y - self.center) - self.half_widths
        inside = np.all(rel <= 0, axis=1)
        d_in = -rel.max(axis=1)
        d_out = np.sqrt((np.maximum(rel, 0) ** 2).sum(axis=1))
        return np.where(inside, d_in, d_out)

    def bounding_box(self):
        return self.center - self.half_widths, self.center + self.half_widths

    def overlap(self, s):
        s = _rows(s, self.m)
        return np.prod(np.maximum(0.0, 2 * self.half_widths - np.abs(s)), axis=1)

    def translated(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return BoxWindow(self.half_widths, self.center + v)

    def intervals(self):
        if self.m != 1:
            return super().intervals()
        hw, c = self._raw
        h = zsqrt2.to_fraction(hw[0])
        c = Fraction(0) if c is None else zsqrt2.to_fraction(c[0])
        return [(c - h, c + h)]

    def to_dict(self):
        out = {"kind": "box", "half_widths": [float(h) for h in self.half_widths]}
        if np.any(self.center != 0):
            out["center"] = [float(c) for c in self.center]
        return out


class BallWindow(Window):
    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.m = len(self.center)
        self.radius = float(radius)
        if self.radius < 0:
            raise ConfigError("negative radius")
        self._raw = (list(np.atleast_1d(center)), radius)

    def contains(self, y):
        y = _rows(y, self.m)
        return np.linalg.norm(y - self.center, axis=1) <= self.radius

    def measure(self):
        m = self.m
        return math.pi ** (m / 2) / math.gamma(m / 2 + 1) * self.radius**m

    def boundary_distance(self, y):
        y = _rows(y, self.m)
        return np.abs(np.linalg.norm(y - self.center, axis=1) - self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def overlap(self, s):
        # lens volume of two balls of radius r at distance delta
        s = _rows(s, self.m)
        delta = np.linalg.norm(s, axis=1)
        r = self.radius
        out = np.zeros(len(s))
        hit = delta < 2 * r
        if r > 0 and hit.any():
            x = 1.0 - delta[hit] ** 2 / (4 * r * r)
            out[hit] = self.measure() * special.betainc((self.m + 1) / 2, 0.5, x)
        return out

    def translated(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return BallWindow(self.center + v, self.radius)

    def intervals(self):
        if self.m != 1:
            return super().intervals()
        c, r = self._raw
        c = zsqrt2.to_fraction(c[0])
        r = zsqrt2.to_fraction(r)
        return [(c - r, c + r)]

    def to_dict(self):
        return {"kind": "ball", "center": [float(c) for c in self.center], "radius": self.radius}


class IntervalUnionWindow(Window):
    kind = "intervals"
    m = 1

    def __init__(self, intervals):
        ivs = sorted((lo, hi) for lo, hi in intervals)
        for lo, hi in ivs:
            if hi < lo:
                raise ConfigError(f"interval [{lo}, {hi}] is reversed")
        for (_, h0), (l1, _) in zip(ivs, ivs[1:]):
            if l1 <= h0:
                raise ConfigError("intervals must be disjoint")
        self._raw = ivs
        self.bounds = np.array([[float(lo), float(hi)] for lo, hi in ivs], dtype=float).reshape(-1, 2)

    def contains(self, y):
        y = _rows(y, 1)[:, 0]
        mask = np.zeros(len(y), dtype=bool)
        for lo, hi in self.bounds:
            mask |= (y >= lo) & (y <= hi)
        return mask

    def measure(self):
        # same arithmetic as overlap(0) so the identity atom weight matches the density
        return float(self.overlap(np.zeros(1))[0])

    def boundary_distance(self, y):
        y = _rows(y, 1)[:, 0]
        ends = self.bounds.ravel()
        return np.min(np.abs(y[:, None] - ends[None, :]), axis=1)

    def bounding_box(self):
        return np.array([self.bounds[0, 0]]), np.array([self.bounds[-1, 1]])

    def overlap(self, s):
        s = _rows(s, 1)[:, 0]
        total = np.zeros(len(s))
        for lo1, hi1 in self.bounds:
            for lo2, hi2 in self.bounds:
                # [lo1, hi1] ∩ ([lo2, hi2] - s)
                total += np.maximum(0.0, np.minimum(hi1, hi2 - s) - np.maximum(lo1, lo2 - s))
        return total

    def translated(self, v):
        v = float(np.atleast_1d(v)[0])
        return IntervalUnionWindow([(lo + v, hi + v) for lo, hi in self._raw])

    def intervals(self):
        return [(zsqrt2.to_fraction(lo), zsqrt2.to_fraction(hi)) for lo, hi in self._raw]

    def to_dict(self):
        return {"kind": "intervals", "intervals": [[float(lo), float(hi)] for lo, hi in self._raw]}


def window_from_dict(spec: dict, m: int | None = None) -> Window:
    """Build a window from its JSON description."""
    try:
        kind = spec.get("kind", "box")
        if kind == "box":
            w = BoxWindow(spec["half_widths"], spec.get("center"))
        elif kind == "ball":
            w = BallWindow(spec["center"], spec["radius"])
        elif kind == "intervals":
            w = IntervalUnionWindow(spec["intervals"])
        else:
            raise ConfigError(f"unknown window kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed window description: {exc}") from exc
    if m is not None and w.m != m:
        raise ConfigError(f"window dimension {w.m} does not match internal dimension {m}")
    return w
