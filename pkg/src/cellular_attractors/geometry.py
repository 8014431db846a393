"""Geometric primitives: point clouds, piecewise-linear radial profiles,
set semidistance, seeded samplers and filled ellipsoids.

Point clouds are plain ``(N, dim)`` float64 arrays; a single point is a
``(dim,)`` array.
"""

from __future__ import annotations

import json
from typing import Iterable

import numpy as np

EPS = np.finfo(float).eps


def as_cloud(points, dim: int | None = None) -> np.ndarray:
    """Validate and return ``points`` as a nonempty finite ``(N, dim)`` array."""
    arr = np.array(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("a point cloud must be a nonempty (N, dim) array")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def cloud_to_json(cloud) -> str:
    cloud = as_cloud(cloud)
    # json emits repr(float), which is the shortest round-trip form
    return json.dumps({"dim": int(cloud.shape[1]), "points": cloud.tolist()})


def cloud_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    return as_cloud(data["points"], dim=int(data["dim"]))


def pad_zeros(cloud, extra: int = 1) -> np.ndarray:
    cloud = np.asarray(cloud, dtype=float)
    return np.hstack([cloud, np.zeros((cloud.shape[0], extra))])


# ---------------------------------------------------------------------------
# Radial profiles


class RadialProfile:
    """Strictly increasing, continuous, piecewise-linear map of [0, inf).

    Parameters
    ----------
    breakpoints : sequence of (r, value) pairs
        Strictly increasing in both coordinates. If the first radius is
        positive, the origin ``(0, 0)`` is prepended.
    tail_slope : float
        Slope of the linear continuation beyond the last breakpoint.
    """

    def __init__(self, breakpoints: Iterable, tail_slope: float = 1.0):
        pts = np.array(list(breakpoints), dtype=float).reshape(-1, 2)
        if pts.shape[0] == 0 or pts[0, 0] > 0:
            pts = np.vstack([[0.0, 0.0], pts])
        if pts[0, 0] < 0 or pts[0, 1] != 0.0:
            raise ValueError("a radial profile must start at (0, 0)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise ValueError("breakpoint radii must be strictly increasing")
        if np.any(np.diff(pts[:, 1]) <= 0):
            raise ValueError("profile values must be strictly increasing")
        if not (np.isfinite(tail_slope) and tail_slope > 0):
            raise ValueError("tail slope must be positive")
        pts.setflags(write=False)
        self.breakpoints = pts
        self.tail_slope = float(tail_slope)

    @classmethod
    def identity(cls) -> "RadialProfile":
        return cls([], 1.0)

    @property
    def radii(self) -> np.ndarray:
        return self.breakpoints[:, 0]

    @property
    def values(self) -> np.ndarray:
        return self.breakpoints[:, 1]

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        rs, vs = self.radii, self.values
        out = np.interp(r, rs, vs) if len(rs) > 1 else np.zeros_like(r)
        tail = r > rs[-1]
        if np.any(tail):
            out = np.where(tail, vs[-1] + self.tail_slope * (r - rs[-1]), out)
        return out if out.ndim else float(out)

    def inverse(self) -> "RadialProfile":
        return RadialProfile(self.breakpoints[:, ::-1], 1.0 / self.tail_slope)

    def slopes(self) -> np.ndarray:
        d = np.diff(self.breakpoints, axis=0)
        return np.append(d[:, 1] / d[:, 0], self.tail_slope)

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "tail_slope": self.tail_slope}

    @classmethod
    def from_dict(cls, data: dict) -> "RadialProfile":
        return cls(data["breakpoints"], data["tail_slope"])

    def __repr__(self):
        return f"RadialProfile({self.breakpoints.tolist()!r}, tail_slope={self.tail_slope!r})"


def profile_eval(profile: RadialProfile, r):
    if np.any(np.asarray(r) < 0):
        raise ValueError("profiles are evaluated on [0, inf)")
    return profile(r)


def profile_invert(profile: RadialProfile) -> RadialProfile:
    return profile.inverse()


# ---------------------------------------------------------------------------
# Set distances


def hausdorff_semidist(A, B, chunk: int = 2048) -> float:
    """sup over a in A of min over b in B of |a - b|, by exhaustive search."""
    A = as_cloud(A)
    B = as_cloud(B, dim=A.shape[1])
    best = 0.0
    for start in range(0, A.shape[0], chunk):
        block = A[start:start + chunk]
        # accumulate squared differences coordinate by coordinate
        sq = np.zeros((block.shape[0], B.shape[0]))
        for d in range(A.shape[1]):
            diff = block[:, d, None] - B[None, :, d]
            sq += diff * diff
        best = max(best, float(np.sqrt(sq.min(axis=1).max())))
    return best


def nearest_distance(points, cloud) -> np.ndarray:
    """Distance from each point to the nearest member of ``cloud``."""
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(as_cloud(cloud)).query(as_cloud(points))
    return dist


# ---------------------------------------------------------------------------
# Seeded samplers (Philox is counter-based: streams are reproducible bitwise)


def rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _check_sampler_args(dim, count, *radii):
    if int(dim) < 1:
        raise ValueError("dimension must be positive")
    if int(count) < 1:
        raise ValueError("sample count must be positive")
    if any(not (r > 0) for r in radii):
        raise ValueError("radii must be positive")


def _directions(gen, dim, count):
    v = gen.standard_normal((count, dim))
    n = np.linalg.norm(v, axis=1)
    while np.any(n < 1e-12):
        bad = n < 1e-12
        v[bad] = gen.standard_normal((int(bad.sum()), dim))
        n = np.linalg.norm(v, axis=1)
    return v / n[:, None]


def random_directions(dim: int, count: int, seed) -> np.ndarray:
    _check_sampler_args(dim, count)
    return _directions(rng(seed), dim, count)


def sample_sphere(dim: int, radius: float, count: int, seed) -> np.ndarray:
    _check_sampler_args(dim, count, radius)
    return radius * _directions(rng(seed), dim, count)


def sample_ball(dim: int, radius: float, count: int, seed) -> np.ndarray:
    return sample_annulus(dim, 0.0, radius, count, seed, _allow_zero=True)


def sample_annulus(dim: int, r_in: float, r_out: float, count: int, seed,
                   _allow_zero: bool = False) -> np.ndarray:
    """Uniform samples of ``{r_in <= |x| <= r_out}``; bounds hold exactly."""
    _check_sampler_args(dim, count, r_out)
    if r_in < 0 or (r_in == 0 and not _allow_zero) or r_in >= r_out:
        raise ValueError("need 0 < r_in < r_out")
    gen = rng(seed)
    u = _directions(gen, dim, count)
    t = gen.random(count)
    r = (r_in**dim + t * (r_out**dim - r_in**dim)) ** (1.0 / dim)
    r = np.clip(r, r_in * (1 + 4 * EPS), r_out * (1 - 4 * EPS))
    return u * r[:, None]


def grid_points(dim: int, radius: float, count: int, seed=None) -> np.ndarray:
    """Deterministic low-discrepancy points filling ``B(0, radius)``.

    Scrambled Sobol points (fixed seed) mapped through the cube, keeping
    those inside the ball, until ``count`` points are collected.
    """
    from scipy.stats import qmc

    sobol = qmc.Sobol(dim, scramble=True, seed=0 if seed is None else seed)
    out = []
    have = 0
    while have < count:
        cube = 2 * sobol.random(max(64, 2 * count)) - 1
        inside = cube[np.linalg.norm(cube, axis=1) < 1.0]
        out.append(inside)
        have += len(inside)
    return radius * np.vstack(out)[:count]


# ---------------------------------------------------------------------------
# Filled ellipsoids: images of the closed unit ball of R^m under an affine map


class FilledEllipsoid:
    """The set ``{center + frame @ u : |u| <= 1}`` in R^dim.

    ``frame`` has shape ``(dim, m)`` with full column rank; ``m = 0`` gives a
    single point. Points, segments and flat disks are all of this form.
    """

    def __init__(self, center, frame=None):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        dim = self.center.size
        frame = np.zeros((dim, 0)) if frame is None else np.asarray(frame, dtype=float)
        frame = frame.reshape(dim, -1)
        if frame.shape[1]:
            q, s, vt = np.linalg.svd(frame, full_matrices=False)
            if s.min() <= 1e-12 * max(1.0, s.max()):
                raise ValueError("ellipsoid frame must have full column rank")
        else:
            q, s, vt = np.zeros((dim, 0)), np.zeros(0), np.zeros((0, 0))
        self.frame = frame
        self._q, self._s, self._vt = q, s, vt

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    @property
    def semi_axes(self) -> np.ndarray:
        return self._s.copy()

    @property
    def axes(self) -> np.ndarray:
        """Orthonormal basis (columns) of the ellipsoid's affine span."""
        return self._q.copy()

    def max_norm(self) -> float:
        """Largest ``|x|`` over the set (exact for centered sets)."""
        if not self.rank:
            return float(np.linalg.norm(self.center))
        if not np.any(self.center):
            return float(self._s.max())
        # |c + F u| <= |c| + |F| is attained only in special cases; use it
        return float(np.linalg.norm(self.center) + self._s.max())

    def sample(self, count: int, seed) -> np.ndarray:
        if not self.rank:
            return np.tile(self.center, (count, 1))
        u = sample_ball(self.rank, 1.0, count, seed)
        return self.center + u @ self.frame.T

    def padded(self, extra: int) -> "FilledEllipsoid":
        return FilledEllipsoid(np.append(self.center, np.zeros(extra)),
                               np.vstack([self.frame, np.zeros((extra, self.rank))]))

    def mapped(self, matrix, offset=None) -> "FilledEllipsoid":
        """Image under ``x -> matrix @ x + offset``."""
        matrix = np.asarray(matrix, dtype=float)
        c = matrix @ self.center + (0 if offset is None else np.asarray(offset, dtype=float))
        return FilledEllipsoid(c, matrix @ self.frame)

    def distance(self, points) -> np.ndarray:
        """Exact Euclidean distance from each point to the filled ellipsoid."""
        p = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        if not self.rank:
            return np.linalg.norm(p, axis=1)
        a = p @ self._q
        perp = p - a @ self._q.T
        perp2 = np.einsum("ij,ij->i", perp, perp)
        s = self._s
        inside = np.einsum("ij,ij->i", a / s, a / s) <= 1.0
        plane2 = np.zeros(len(p))
        out = ~inside
        if np.any(out):
            ao = a[out]
            lo = np.zeros(len(ao))
            hi = np.linalg.norm(ao * s, axis=1)
            # |z(lam)| with z_i = s_i a_i / (s_i^2 + lam) decreases in lam
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                z = ao * s / (s**2 + mid[:, None])
                big = np.einsum("ij,ij->i", z, z) > 1.0
                lo = np.where(big, mid, lo)
                hi = np.where(big, hi, mid)
            z = ao * s / (s**2 + hi[:, None])
            d = ao - s * z
            plane2[out] = np.einsum("ij,ij->i", d, d)
        return np.sqrt(perp2 + plane2)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "frame": self.frame.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FilledEllipsoid":
        c = np.asarray(data["center"], dtype=float)
        return cls(c, np.asarray(data["frame"], dtype=float).reshape(c.size, -1))
