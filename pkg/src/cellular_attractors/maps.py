"""Composable homeomorphisms of R^n with exactly stored inverses.

Every map acts on ``(N, dim)`` arrays (or a single ``(dim,)`` point) through
``__call__`` and ``inverse``. Composite maps keep their children, so the
inverse of a composite is always the reversed composite of child inverses.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .geometry import RadialProfile


def _apply(fn, points, dim):
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        if arr.size != dim:
            raise ValueError(f"expected a point of dimension {dim}, got {arr.size}")
        return fn(arr.reshape(1, dim))[0]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected an (N, {dim}) array, got shape {arr.shape}")
    return fn(arr)


class InvertibleMap:
    """Base class. Subclasses implement ``_forward`` and ``_backward``."""

    kind = "abstract"

    def __init__(self, dim: int):
        if int(dim) < 1:
            raise ValueError("dimension must be positive")
        self.dim = int(dim)

    def _forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _backward(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points):
        return _apply(self._forward, points, self.dim)

    def inverse(self, points):
        return _apply(self._backward, points, self.dim)

    @property
    def inv(self) -> "InvertibleMap":
        return Inverted(self)

    def __matmul__(self, other: "InvertibleMap") -> "Composition":
        return Composition([self, other])

    def __pow__(self, exponent: int) -> "InvertibleMap":
        return Power(self, exponent)

    def ray_extent(self, directions, radius: float) -> np.ndarray:
        """Boundary radius of ``self(closed ball(0, radius))`` along each unit
        direction, assuming the image is star-shaped about the origin."""
        return _bisect_extent(self, np.atleast_2d(directions), radius)

    def round_trip_error(self, points) -> float:
        """max of |m^-1(m(p)) - p| and |m(m^-1(p)) - p| over ``points``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a = np.abs(self.inverse(self(p)) - p)
        b = np.abs(self(self.inverse(p)) - p)
        return float(max(np.linalg.norm(a, axis=1).max(), np.linalg.norm(b, axis=1).max()))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}


def _bisect_extent(m: InvertibleMap, directions, radius, iterations=60):
    """sup{r : |m^-1(r xi)| <= radius} by doubling then bisection."""
    lo = np.zeros(len(directions))
    hi = np.full(len(directions), radius)
    for _ in range(200):
        outside = np.linalg.norm(m.inverse(hi[:, None] * directions), axis=1) > radius
        if np.all(outside):
            break
        hi = np.where(outside, hi, 2 * hi)
    else:
        raise ValueError("cell image is unbounded along some direction")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        inside = np.linalg.norm(m.inverse(mid[:, None] * directions), axis=1) <= radius
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


class Identity(InvertibleMap):
    kind = "identity"

    def _forward(self, x):
        return x.copy()

    _backward = _forward

    def ray_extent(self, directions, radius):
        return np.full(len(np.atleast_2d(directions)), float(radius))


class RadialMap(InvertibleMap):
    """``p -> profile(|p|) p / |p|`` with the origin fixed."""

    kind = "radial"

    def __init__(self, profile: RadialProfile, dim: int):
        super().__init__(dim)
        self.profile = profile
        self._inverse_profile = profile.inverse()
        # radius up to which the profile is the identity; points there stay bitwise
        bp = profile.breakpoints
        same = np.flatnonzero(bp[:, 0] != bp[:, 1])
        self.identity_radius = float(bp[same[0] - 1, 0] if len(same) else np.inf
                                     if profile.tail_slope == 1.0 else bp[-1, 0])

    @staticmethod
    def _scale(profile, x, keep=0.0):
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0, r, 1.0)
        factor = np.where(r > 0, profile(r) / safe, 0.0)
        out = x * factor[:, None]
        fixed = r <= keep
        out[fixed] = x[fixed]
        return out

    def _forward(self, x):
        return self._scale(self.profile, x, self.identity_radius)

    def _backward(self, y):
        return self._scale(self._inverse_profile, y, self.identity_radius)

    def ray_extent(self, directions, radius):
        return np.full(len(np.atleast_2d(directions)), float(self.profile(radius)))

    def to_dict(self):
        return {**super().to_dict(), "profile": self.profile.to_dict()}


def radial_apply(m: RadialMap, p):
    return m(p)


class AffineMap(InvertibleMap):
    """``x -> matrix @ x + offset`` for an invertible square matrix."""

    kind = "affine"

    def __init__(self, matrix, offset=None):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("affine maps need a square matrix")
        super().__init__(matrix.shape[0])
        if np.linalg.cond(matrix) > 1e12:
            raise ValueError("affine matrix is numerically singular")
        self.matrix = matrix
        self.offset = np.zeros(self.dim) if offset is None else np.array(offset, dtype=float)
        self._inv_matrix = np.linalg.inv(matrix)

    @classmethod
    def scaling(cls, factor: float, dim: int) -> "AffineMap":
        return cls(factor * np.eye(dim))

    @classmethod
    def rotation2d(cls, angle: float) -> "AffineMap":
        c, s = np.cos(angle), np.sin(angle)
        return cls([[c, -s], [s, c]])

    def _forward(self, x):
        return x @ self.matrix.T + self.offset

    def _backward(self, y):
        return (y - self.offset) @ self._inv_matrix.T

    def ray_extent(self, directions, radius):
        if np.any(self.offset):
            return super().ray_extent(directions, radius)
        d = np.atleast_2d(directions) @ self._inv_matrix.T
        return radius / np.linalg.norm(d, axis=1)

    def to_dict(self):
        return {**super().to_dict(), "matrix": self.matrix.tolist(), "offset": self.offset.tolist()}


class BlockProduct(InvertibleMap):
    """``(x_1, ..., x_k) -> (m_1(x_1), ..., m_k(x_k))``."""

    kind = "product"

    def __init__(self, blocks: Sequence[InvertibleMap]):
        self.blocks = list(blocks)
        self._cuts = np.cumsum([0] + [b.dim for b in self.blocks])
        super().__init__(int(self._cuts[-1]))

    def _split_apply(self, x, backward):
        parts = []
        for b, lo, hi in zip(self.blocks, self._cuts[:-1], self._cuts[1:]):
            fn = b._backward if backward else b._forward
            parts.append(fn(x[:, lo:hi]))
        return np.hstack(parts)

    def _forward(self, x):
        return self._split_apply(x, False)

    def _backward(self, y):
        return self._split_apply(y, True)

    def to_dict(self):
        return {**super().to_dict(), "blocks": [b.to_dict() for b in self.blocks]}


class Composition(InvertibleMap):
    """``maps[0] o maps[1] o ... o maps[-1]`` (the last map acts first)."""

    kind = "composition"

    def __init__(self, maps: Sequence[InvertibleMap]):
        maps = list(maps)
        if not maps:
            raise ValueError("empty composition")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise ValueError(f"dimension mismatch in composition: {sorted(dims)}")
        super().__init__(maps[0].dim)
        self.maps = maps

    def _forward(self, x):
        for m in reversed(self.maps):
            x = m._forward(x)
        return x

    def _backward(self, y):
        for m in self.maps:
            y = m._backward(y)
        return y

    def to_dict(self):
        return {**super().to_dict(), "maps": [m.to_dict() for m in self.maps]}


class Power(InvertibleMap):
    """``base`` iterated ``exponent`` times (exponent >= 0)."""

    kind = "composition"

    def __init__(self, base: InvertibleMap, exponent: int):
        if int(exponent) < 0:
            raise ValueError("exponent must be nonnegative")
        super().__init__(base.dim)
        self.base = base
        self.exponent = int(exponent)

    def _forward(self, x):
        for _ in range(self.exponent):
            x = self.base._forward(x)
        return x

    def _backward(self, y):
        for _ in range(self.exponent):
            y = self.base._backward(y)
        return y

    def to_dict(self):
        return {"kind": "power", "dim": self.dim, "exponent": self.exponent,
                "base": self.base.to_dict()}


class Inverted(InvertibleMap):
    kind = "composition"

    def __init__(self, base: InvertibleMap):
        super().__init__(base.dim)
        self.base = base

    def _forward(self, x):
        return self.base._backward(x)

    def _backward(self, y):
        return self.base._forward(y)

    def to_dict(self):
        return {"kind": "inverse", "dim": self.dim, "base": self.base.to_dict()}


class FunctionPair(InvertibleMap):
    """A homeomorphism given by a pair of vectorized callables."""

    kind = "callable"

    def __init__(self, forward: Callable, backward: Callable, dim: int, name: str = ""):
        super().__init__(dim)
        self.forward_fn = forward
        self.backward_fn = backward
        self.name = name

    def _forward(self, x):
        return np.asarray(self.forward_fn(x), dtype=float).reshape(x.shape)

    def _backward(self, y):
        return np.asarray(self.backward_fn(y), dtype=float).reshape(y.shape)

    def to_dict(self):
        return {**super().to_dict(), "name": self.name}
