"""Collapse of a cellular set onto the origin, truncated at a finite depth,
and the homeomorphism that realizes the set as an attractor.

The collapse ``g_J`` is built stage by stage. Stage ``j`` is the identity
outside ``g_{j-1}(C_{j-1})`` and squeezes ``g_{j-1}(C_j)`` into the open
ball of radius ``R/(j+1)``. All shipped cells are star-shaped about the
origin, so every stage moves points along rays with a three-segment profile
whose breakpoints depend only on the direction.

The attractor map is ``h = g^-1 o a o g`` where ``a`` is the radial map of
the profile ``alpha(r) = r - beta(r)``; stored samples of the set are fixed
exactly.
"""

from __future__ import annotations

import numpy as np

from .cells import CellSequence, NestingError, cells_from_dict, sample_directions
from .geometry import RadialProfile, as_cloud
from .maps import InvertibleMap, RadialMap

SHRINK = 1 - 1e-6
# stage targets sit just inside the open ball B(0, R/(j+1))
INSIDE = 1 - 1e-9


class CollapseMap(InvertibleMap):
    """Truncated collapse ``g_J``; the identity outside ``B(0, R)``."""

    kind = "restriction_stack"

    def __init__(self, cells: CellSequence, R: float, J: int):
        super().__init__(cells.dim)
        if not 1 <= J <= len(cells):
            raise ValueError(f"depth J={J} needs between 1 and {len(cells)} cells")
        self.cells = cells
        self.R = float(R)
        self.J = int(J)

    @property
    def stages(self) -> list["CollapseMap"]:
        """``g_1, ..., g_J``."""
        return [CollapseMap(self.cells, self.R, j) for j in range(1, self.J + 1)]

    @property
    def truncation_bound(self) -> float:
        """Radius of the open ball that receives the innermost cell."""
        return self.R / (self.J + 1)

    def tables(self, directions):
        """Per-direction stage breakpoints ``(u, t, o)``, each ``(N, J)``.

        Stage ``j`` maps ``u -> t`` and fixes ``o`` and everything beyond.
        """
        sigma = self.cells.extents(directions, self.J)
        sigma = np.minimum(sigma, self.R)
        # strict nesting along every ray (guards rounding on sampled-valid cells)
        for j in range(1, self.J):
            sigma[:, j] = np.minimum(sigma[:, j], sigma[:, j - 1] * (1 - 1e-12))
        n = len(sigma)
        u = np.empty_like(sigma)
        t = np.empty_like(sigma)
        o = np.empty_like(sigma)
        ratio = np.ones(n)
        outer = np.full(n, self.R)
        for j in range(self.J):
            # sigma_j lies inside every earlier cell, so earlier stages act linearly on it
            u[:, j] = sigma[:, j] * ratio
            t[:, j] = np.minimum(u[:, j], INSIDE * self.R / (j + 2))
            o[:, j] = outer
            ratio = ratio * t[:, j] / u[:, j]
            outer = t[:, j]
        return u, t, o

    def _radial(self, x, backward):
        out = x.copy()
        r = np.linalg.norm(x, axis=1)
        live = (r > 0) & (r < self.R)
        if not np.any(live):
            return out
        xi = x[live] / r[live, None]
        u, t, o = self.tables(xi)
        s = r[live]
        order = range(self.J - 1, -1, -1) if backward else range(self.J)
        for j in order:
            src, dst = (t[:, j], u[:, j]) if backward else (u[:, j], t[:, j])
            oj = o[:, j]
            low = s <= src
            mid = ~low & (s < oj)
            new = s.copy()
            new[low] = s[low] * (dst[low] / src[low])
            new[mid] = dst[mid] + (s[mid] - src[mid]) * ((oj[mid] - dst[mid]) / (oj[mid] - src[mid]))
            s = new
        out[live] = xi * s[:, None]
        return out

    def _forward(self, x):
        return self._radial(x, False)

    def _backward(self, y):
        return self._radial(y, True)

    def to_dict(self):
        return {**super().to_dict(), "R": self.R, "J": self.J, "cells": self.cells.to_dict()}


def brown_collapse(cells: CellSequence, R: float, J: int, directions: int = 512, seed=0) -> CollapseMap:
    """Truncated collapse ``g_J`` with ``g_J(C_J)`` inside ``B(0, R/(J+1))``.

    Raises :class:`NestingError` (carrying the offending 0-based cell index)
    when sampled cells are not strictly nested inside ``B(0, R)``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if J > len(cells):
        raise ValueError(f"only {len(cells)} cells available for depth {J}")
    xi = sample_directions(cells.dim, directions, seed)
    sigma = cells.extents(xi, J)
    if not np.all(sigma[:, 0] < R):
        raise NestingError(0, "first cell is not strictly inside B(0, R)")
    for j in range(1, J):
        if not np.all(sigma[:, j] < sigma[:, j - 1]):
            raise NestingError(j)
    return CollapseMap(cells, R, J)


def estimate_bk(g: InvertibleMap, k: int, sample_count: int = 64, previous: float | None = None,
                R: float | None = None, R_prime: float | None = None, ray_points: int = 65,
                seed=0) -> float:
    """A radial modulus ``b_k`` for ``g^-1`` on the annulus ``2^-(k+1) <= |x| <= 2^-k``.

    The sampled condition ``|g^-1(r xi) - g^-1(s xi)| <= 2^-k / 2`` (safety
    factor 2) must hold whenever ``|r - s| <= b_k``; the raw value is capped
    at ``2^-k``. The result is then clamped to ``b_k < min(b_{k-1}/2,
    2^-(k+3))`` and, for ``k = 0``, to ``b_0 < R - R_prime``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    raw = _raw_modulus(g, k, sample_count, ray_points, seed)
    cap = 2.0 ** -(k + 3)
    if previous is not None:
        cap = min(cap, previous / 2)
    b = min(raw, cap * SHRINK)
    if k == 0 and R is not None and R_prime is not None:
        b = min(b, (R - R_prime) * SHRINK)
    if not b > 0:
        raise ValueError("no positive modulus: need R > R_prime")
    return b


def _ray_images(g, k, sample_count, ray_points, seed):
    xi = sample_directions(g.dim, sample_count, seed)
    r = np.linspace(2.0 ** -(k + 1), 2.0 ** -k, ray_points)
    pts = (xi[:, None, :] * r[None, :, None]).reshape(-1, g.dim)
    return r, g.inverse(pts).reshape(len(xi), ray_points, g.dim)


def _raw_modulus(g, k, sample_count, ray_points, seed):
    r, img = _ray_images(g, k, sample_count, ray_points, seed)
    tol = 2.0 ** -k / 2 * (1 + 1e-9)
    step = r[1] - r[0]
    worst = 0.0
    for lag in range(1, ray_points):
        d = np.linalg.norm(img[:, lag:] - img[:, :-lag], axis=2).max()
        worst = max(worst, float(d))
        if worst > tol:
            if lag == 1:
                return step * tol / worst
            return (lag - 1) * step
    return 2.0 ** -k


def modulus_violations(g: InvertibleMap, k: int, b: float, sample_count: int = 64,
                       ray_points: int = 65, seed=1) -> int:
    """Sampled pairs on annulus ``k`` with ``|r - s| <= b`` but
    ``|g^-1(r xi) - g^-1(s xi)| > 2^-k``."""
    r, img = _ray_images(g, k, sample_count, ray_points, seed)
    count = 0
    for lag in range(1, ray_points):
        if r[lag] - r[0] > b:
            break
        d = np.linalg.norm(img[:, lag:] - img[:, :-lag], axis=2)
        count += int(np.sum(d > 2.0 ** -k))
    return count


def complete_b_sequence(b, k_total: int = 60) -> np.ndarray:
    """Continue ``b`` geometrically (``b_{k+1} = b_k/2 * (1 - 1e-6)``)."""
    b = [float(v) for v in b]
    while len(b) <= k_total:
        b.append(b[-1] / 2 * SHRINK)
    return np.asarray(b)


def validate_b_sequence(b) -> None:
    b = np.asarray(b, dtype=float)
    k = np.arange(len(b))
    if np.any(b <= 0):
        raise ValueError("b_k must be positive")
    if np.any(b >= 2.0 ** -(k + 3)):
        raise ValueError("need b_k < 2^-(k+3)")
    if np.any(b[1:] > b[:-1] / 2):
        raise ValueError("need b_k <= b_{k-1}/2")


def alpha_profile(b) -> RadialProfile:
    """``alpha(r) = r - beta(r)`` with ``beta(2^-k) = b_k``, ``beta = b_0`` on
    ``[1, inf)`` and ``beta`` linear down to 0 below the last level."""
    b = np.asarray(b, dtype=float)
    k = np.arange(len(b))[::-1]
    r = 2.0 ** -k
    return RadialProfile(np.column_stack([r, r - b[::-1]]), tail_slope=1.0)


class GarayMap(InvertibleMap):
    """``h(x) = g^-1[alpha(|g(x)|) g(x)/|g(x)|]``, the identity on stored samples.

    Construction works in coordinates scaled by ``scale`` so that the
    collapse radius exceeds 1; evaluation undoes the scaling. ``rho`` is the
    sphere contraction in caller units: ``|h(x)| = |x| - rho`` for
    ``|x| >= R``.
    """

    kind = "composition"

    def __init__(self, X, g: CollapseMap, b, R: float, scale: float = 1.0, cells: CellSequence | None = None):
        super().__init__(g.dim)
        self.X = as_cloud(X, dim=g.dim)
        self.g = g
        self.b = np.asarray(b, dtype=float)
        self.R = float(R)
        self.scale = float(scale)
        self.cells = cells
        self.alpha = alpha_profile(self.b)
        self._alpha_map = RadialMap(self.alpha, self.dim)
        self._fixed = {row.tobytes() for row in self.X}

    @property
    def rho(self) -> float:
        return float(self.b[0] / self.scale)

    @property
    def R_prime(self) -> float:
        return self.g.R / self.scale

    def beta(self, r):
        b = self.b
        k = np.arange(len(b))[::-1]
        return np.interp(r, np.append(0.0, 2.0 ** -k), np.append(0.0, b[::-1]))

    def _fixed_mask(self, x):
        return np.fromiter((row.tobytes() in self._fixed for row in x), bool, len(x))

    def _conjugated(self, x, backward):
        out = x.copy()
        move = ~self._fixed_mask(x)
        if not np.any(move):
            return out
        y = x[move] * self.scale if self.scale != 1.0 else x[move]
        y = self.g._forward(y)
        y = self._alpha_map._backward(y) if backward else self._alpha_map._forward(y)
        y = self.g._backward(y)
        out[move] = y / self.scale if self.scale != 1.0 else y
        return out

    def _forward(self, x):
        return self._conjugated(x, False)

    def _backward(self, y):
        return self._conjugated(y, True)

    # -- quantities used by reports and step bounds

    def alpha_steps(self, r0: float, target: float, cap: int = 10**7) -> int:
        """Least ``n`` with ``alpha^n(r0) <= target`` (working units)."""
        r, n = float(r0), 0
        while r > target:
            r = float(self.alpha(r))
            n += 1
            if n > cap:
                raise RuntimeError("alpha iteration did not reach the target")
        return n

    def entry_radius(self, eps: float, distance_to_X, samples: int = 256, seed=0) -> float:
        """Working-units radius ``tau`` with ``g^-1(B(0, tau))`` inside
        ``N(X, eps)``: the innermost-cell targets of the first cell that lies
        within ``eps`` of ``X`` on boundary samples."""
        cells = self.g.cells
        for j in range(self.g.J):
            bnd = cells.boundary_samples(j, samples, seed) / self.scale
            if np.max(distance_to_X(bnd)) < eps:
                xi = sample_directions(self.dim, samples, seed)
                _, t, _ = self.g.tables(xi)
                return float(t[:, j].min())
        raise ValueError(f"no cell within {eps} of X at depth J={self.g.J}")

    def entry_step_bound(self, start_radius: float, eps: float, distance_to_X) -> int:
        """Iterations after which orbits from ``B(0, start_radius)`` stay in ``N(X, eps)``."""
        tau = self.entry_radius(eps, distance_to_X)
        r0 = self.scale * max(start_radius, self.R_prime)
        return self.alpha_steps(r0, tau)

    def to_dict(self) -> dict:
        return {"kind": "garay", "dim": self.dim, "R": self.R, "R_prime": self.R_prime,
                "scale": self.scale, "rho": self.rho, "J": self.g.J, "b": self.b.tolist(),
                "alpha": self.alpha.to_dict(),
                "beta": {"radii": np.append(0.0, 2.0 ** -np.arange(len(self.b))[::-1]).tolist(),
                         "values": np.append(0.0, self.b[::-1]).tolist(), "tail": float(self.b[0])},
                "cells": self.cells.to_dict() if self.cells is not None else None,
                "X": self.X.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "GarayMap":
        cells = cells_from_dict(data["cells"])
        working = cells.scaled(data["scale"])
        g = CollapseMap(working, data["R_prime"] * data["scale"], data["J"])
        return cls(data["X"], g, data["b"], data["R"], data["scale"], cells)


def garay_map(X, cells: CellSequence, R: float, K_depth: int = 8, J: int = 20, b=None,
              sample_count: int = 64, k_total: int = 60, seed=0) -> GarayMap:
    """Homeomorphism fixing the samples ``X`` whose attractor lies in the
    cells' intersection, with ``h(B(0, r)) in B(0, r - rho)`` for ``r >= R``.

    ``b`` may be given explicitly (working units); otherwise it is estimated
    up to ``K_depth`` and continued geometrically to ``k_total`` levels.
    """
    X = as_cloud(X, dim=cells.dim)
    J = min(J, len(cells))
    if not np.all(cells.contains(J - 1, X, margin=-1e-12)):
        raise ValueError("X must lie inside the innermost cell")
    outer = max(cells.outer_radius(0), float(np.linalg.norm(X, axis=1).max()))
    if not outer < R:
        raise ValueError("the first cell must lie strictly inside B(0, R)")
    r_prime = 0.5 * (outer + R)
    scale = 1.0 if r_prime > 1 else 1.5 / r_prime
    g = brown_collapse(cells.scaled(scale) if scale != 1.0 else cells, scale * r_prime, J, seed=seed)
    R_w, Rp_w = scale * R, scale * r_prime
    if b is None:
        seq = []
        for k in range(K_depth + 1):
            seq.append(estimate_bk(g, k, sample_count, seq[-1] if seq else None, R_w, Rp_w, seed=seed))
        b = seq
    else:
        b = [float(v) for v in b]
        if not b[0] < R_w - Rp_w:
            raise ValueError("need R - b_0 > R' in working units")
    validate_b_sequence(b)
    return GarayMap(X, g, complete_b_sequence(b, k_total), R, scale, cells)
