"""Built-in dynamical systems, addressable by name from experiment configs.

Each factory returns an :class:`InvertibleMap` on the ambient space. The
attractor-bearing systems also expose the exact attractor as a
:class:`FilledEllipsoid` through :func:`attractor_shape`.
"""

from __future__ import annotations

import numpy as np

from .geometry import FilledEllipsoid, RadialProfile, rng
from .maps import AffineMap, Composition, FunctionPair, InvertibleMap, RadialMap


def linear_contraction(dim: int = 2, factor: float = 0.5, angle: float = 0.0) -> InvertibleMap:
    """``x -> factor * x``, optionally rotated by ``angle`` in the first plane."""
    mat = factor * np.eye(dim)
    if angle:
        if dim < 2:
            raise ValueError("rotation needs dimension >= 2")
        c, s = np.cos(angle), np.sin(angle)
        mat[:2, :2] = factor * np.array([[c, -s], [s, c]])
    return AffineMap(mat)


def circle_pull_rotation(angle: float = 1.0) -> InvertibleMap:
    """Planar rotation composed with a radial pull of every norm towards 1."""
    pull = RadialProfile([(0.5, 0.75), (1.0, 1.0), (2.0, 1.5)], tail_slope=0.5)
    return Composition([AffineMap.rotation2d(angle), RadialMap(pull, 2)])


def orthonormal_frame(ambient_dim: int, rank: int, seed) -> np.ndarray:
    """``(ambient_dim, rank)`` matrix with orthonormal columns."""
    q, _ = np.linalg.qr(rng(seed).standard_normal((ambient_dim, rank)))
    return q[:, :rank]


def _split(x, center, frame):
    rel = x - center
    coords = rel @ frame
    return coords, rel - coords @ frame.T


def fixed_point(ambient_dim: int = 3, point=None) -> InvertibleMap:
    """``x -> p + (x - p)/2``: global attractor ``{p}``."""
    p = np.full(ambient_dim, 0.1) if point is None else np.asarray(point, dtype=float)
    m = AffineMap(0.5 * np.eye(ambient_dim), 0.5 * p)
    m.attractor = FilledEllipsoid(p)
    return m


def arc_morse(ambient_dim: int = 4, half_length: float = 0.5, seed=11, center=None) -> InvertibleMap:
    """North-south dynamics on a segment, contracting onto it from outside.

    Along the segment (parameter ``t`` in [-1, 1]) the map is
    ``t -> t - (1 - t^2)/4``: ``t = 1`` repels, ``t = -1`` attracts. Off the
    segment, the transverse component halves and ``|t| > 1`` is pulled back.
    """
    v = orthonormal_frame(ambient_dim, 1, seed)
    c = np.zeros(ambient_dim) if center is None else np.asarray(center, dtype=float)
    L = float(half_length)

    def along(t):
        inner = t - 0.25 * (1 - t * t)
        return np.where(t > 1, 1 + 0.5 * (t - 1), np.where(t < -1, -1 + 0.5 * (t + 1), inner))

    def along_inv(s):
        inner = 2 * (np.sqrt(1.25 + np.clip(s, -1, 1)) - 1)
        return np.where(s > 1, 1 + 2 * (s - 1), np.where(s < -1, -1 + 2 * (s + 1), inner))

    def fwd(x):
        coords, perp = _split(x, c, v)
        return c + L * along(coords / L) @ v.T + 0.5 * perp

    def bwd(y):
        coords, perp = _split(y, c, v)
        return c + L * along_inv(coords / L) @ v.T + 2.0 * perp

    m = FunctionPair(fwd, bwd, ambient_dim, "arc_morse")
    m.attractor = FilledEllipsoid(c, L * v)
    m.along = along
    m.along_inverse = along_inv
    m.axis = v[:, 0]
    return m


def disk_rotation(ambient_dim: int = 20, radius: float = 0.5, angle: float = 2 * np.pi * 5 / 24,
                  seed=7, center=None) -> InvertibleMap:
    """Rigid rotation of a flat 2-disk, which attracts everything else.

    In the disk's plane the norm is left alone inside the disk and pulled
    back outside it; the transverse component halves.
    """
    P = orthonormal_frame(ambient_dim, 2, seed)
    c = np.zeros(ambient_dim) if center is None else np.asarray(center, dtype=float)
    a = float(radius)
    pull = RadialMap(RadialProfile([(a, a), (2 * a, 1.5 * a)], tail_slope=0.5), 2)
    rot = AffineMap.rotation2d(angle)

    def fwd(x):
        coords, perp = _split(x, c, P)
        return c + rot(pull(coords)) @ P.T + 0.5 * perp

    def bwd(y):
        coords, perp = _split(y, c, P)
        return c + pull.inverse(rot.inverse(coords)) @ P.T + 2.0 * perp

    m = FunctionPair(fwd, bwd, ambient_dim, "disk_rotation")
    m.attractor = FilledEllipsoid(c, a * P)
    m.plane = P
    m.angle = angle
    return m


SYSTEMS = {
    "linear_contraction": linear_contraction,
    "circle_pull_rotation": circle_pull_rotation,
    "fixed_point": fixed_point,
    "arc_morse": arc_morse,
    "disk_rotation": disk_rotation,
}


def make_system(name: str, **params) -> InvertibleMap:
    try:
        factory = SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; known: {sorted(SYSTEMS)}") from None
    return factory(**params)


def attractor_shape(system: InvertibleMap) -> FilledEllipsoid:
    shape = getattr(system, "attractor", None)
    if shape is None:
        raise ValueError("this system does not carry an exact attractor description")
    return shape


# ---------------------------------------------------------------------------
# Closed-form semiflows, called as ``semiflow(t, points)``


def linear_semiflow(t, x):
    """``S(t) x = exp(-t) x``: global attractor ``{0}``."""
    return np.exp(-np.asarray(t, dtype=float)).reshape(-1, 1) * np.atleast_2d(x)


def segment_semiflow(t, x):
    """Flow of ``x' = x(1 - x^2), y' = -y``; global attractor ``[-1, 1] x {0}``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), (len(x),))
    e = np.exp(t)
    u = x[:, 0]
    out = np.empty_like(x)
    out[:, 0] = u * e / np.sqrt(1 + u * u * (e * e - 1))
    out[:, 1:] = x[:, 1:] / e[:, None]
    return out


SEMIFLOWS = {"linear_semiflow": linear_semiflow, "segment_semiflow": segment_semiflow}


# ---------------------------------------------------------------------------
# Cellular sets with explicit cells, for the attractor-realization demos


def garay_point_demo(dim: int = 2, count: int = 20):
    """``X = {0}`` with round cells of radius ``2^-(j+1)``; returns
    ``(X, cells, R, distance_to_X)``."""
    from .cells import round_cells

    cells = round_cells([2.0 ** -(j + 1) for j in range(count)], dim)
    return np.zeros((1, dim)), cells, 1.0, lambda p: np.linalg.norm(np.atleast_2d(p), axis=1)


def garay_segment_demo(dim: int = 3, half_length: float = 0.4, count: int = 20, samples: int = 41):
    """A segment through the origin with ellipsoidal cells hugging it."""
    from .cells import neighbourhood_cells

    body = FilledEllipsoid(np.zeros(dim), half_length * np.eye(dim)[:, :1])
    cells = neighbourhood_cells(body, [0.3 * 2.0**-j for j in range(count)])
    X = np.outer(np.linspace(-half_length, half_length, samples), np.eye(dim)[0])
    return X, cells, 1.0, body.distance


GARAY_DEMOS = {"point": garay_point_demo, "segment": garay_segment_demo}
