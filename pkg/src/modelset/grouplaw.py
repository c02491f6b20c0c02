"""Group laws for the three ambient groups: R^d, the Heisenberg group and SL2(R).

Elements are rows of a float array: ``(x_1..x_d)`` for R^d, ``(x, y, z)``
for Heisenberg and ``(a, b, c, d)`` for SL2. The ``*_exact`` methods act on
integer arrays with a trailing Z[√2] pair axis, shape ``(n, k, 2)``.
"""

from __future__ import annotations

import numpy as np

from .zsqrt2 import mul_pairs


class EuclideanLaw:
    name = "euclidean"

    def __init__(self, dim: int):
        self.dim = dim

    def identity(self):
        return np.zeros(self.dim)

    def mul(self, g, h):
        return np.asarray(g) + np.asarray(h)

    def inv(self, g):
        return -np.asarray(g)

    def norm(self, g):
        g = np.asarray(g, dtype=float)
        return np.linalg.norm(g.reshape(-1, self.dim), axis=1)

    def mul_exact(self, g, h):
        return g + h

    def inv_exact(self, g):
        return -g

    def __eq__(self, other):
        return isinstance(other, EuclideanLaw) and other.dim == self.dim


class HeisenbergLaw:
    """Unitriangular 3x3 matrices with coordinates (x, y, z) above the diagonal.

    ``norm`` is the quasi-norm ``max(|x|, |y|, |z|^(1/2))``; it is homogeneous
    under the dilations but satisfies the triangle inequality only up to a
    constant, so it is used for reports, never for exact decisions.
    """

    name = "heisenberg"
    dim = 3

    def identity(self):
        return np.zeros(3)

    def mul(self, g, h):
        g = np.asarray(g, dtype=float)
        h = np.asarray(h, dtype=float)
        x = g[..., 0] + h[..., 0]
        y = g[..., 1] + h[..., 1]
        z = g[..., 2] + h[..., 2] + g[..., 0] * h[..., 1]
        return np.stack([x, y, z], axis=-1)

    def inv(self, g):
        g = np.asarray(g, dtype=float)
        return np.stack([-g[..., 0], -g[..., 1], -g[..., 2] + g[..., 0] * g[..., 1]], axis=-1)

    def norm(self, g):
        g = np.asarray(g, dtype=float).reshape(-1, 3)
        return np.maximum(np.maximum(np.abs(g[:, 0]), np.abs(g[:, 1])), np.sqrt(np.abs(g[:, 2])))

    def mul_exact(self, g, h):
        x = g[..., 0, :] + h[..., 0, :]
        y = g[..., 1, :] + h[..., 1, :]
        z = g[..., 2, :] + h[..., 2, :] + mul_pairs(g[..., 0, :], h[..., 1, :])
        return np.stack([x, y, z], axis=-2)

    def inv_exact(self, g):
        z = -g[..., 2, :] + mul_pairs(g[..., 0, :], g[..., 1, :])
        return np.stack([-g[..., 0, :], -g[..., 1, :], z], axis=-2)

    def __eq__(self, other):
        return isinstance(other, HeisenbergLaw)


class SL2Law:
    """2x2 matrices ``[[a, b], [c, d]]`` stored as rows ``(a, b, c, d)``.

    ``norm`` is the Frobenius distance to the identity.
    """

    name = "sl2"
    dim = 4

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 1.0])

    def mul(self, g, h):
        g = np.asarray(g, dtype=float)
        h = np.asarray(h, dtype=float)
        a = g[..., 0] * h[..., 0] + g[..., 1] * h[..., 2]
        b = g[..., 0] * h[..., 1] + g[..., 1] * h[..., 3]
        c = g[..., 2] * h[..., 0] + g[..., 3] * h[..., 2]
        d = g[..., 2] * h[..., 1] + g[..., 3] * h[..., 3]
        return np.stack([a, b, c, d], axis=-1)

    def inv(self, g):
        g = np.asarray(g, dtype=float)
        return np.stack([g[..., 3], -g[..., 1], -g[..., 2], g[..., 0]], axis=-1)

    def det(self, g):
        g = np.asarray(g, dtype=float)
        return g[..., 0] * g[..., 3] - g[..., 1] * g[..., 2]

    def norm(self, g):
        g = np.asarray(g, dtype=float).reshape(-1, 4)
        return np.linalg.norm(g - self.identity(), axis=1)

    def mul_exact(self, g, h):
        a = mul_pairs(g[..., 0, :], h[..., 0, :]) + mul_pairs(g[..., 1, :], h[..., 2, :])
        b = mul_pairs(g[..., 0, :], h[..., 1, :]) + mul_pairs(g[..., 1, :], h[..., 3, :])
        c = mul_pairs(g[..., 2, :], h[..., 0, :]) + mul_pairs(g[..., 3, :], h[..., 2, :])
        d = mul_pairs(g[..., 2, :], h[..., 1, :]) + mul_pairs(g[..., 3, :], h[..., 3, :])
        return np.stack([a, b, c, d], axis=-2)

    def inv_exact(self, g):
        return np.stack([g[..., 3, :], -g[..., 1, :], -g[..., 2, :], g[..., 0, :]], axis=-2)

    def det_exact(self, g):
        return mul_pairs(g[..., 0, :], g[..., 3, :]) - mul_pairs(g[..., 1, :], g[..., 2, :])

    def __eq__(self, other):
        return isinstance(other, SL2Law)


def law_from_name(name: str, dim: int = 1):
    if name == "euclidean":
        return EuclideanLaw(dim)
    if name == "heisenberg":
        return HeisenbergLaw()
    if name == "sl2":
        return SL2Law()
    raise ValueError(f"unknown group law {name!r}")
