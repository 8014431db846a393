"""Nested cell sequences and the shipped cell providers.

A cell is the image of the closed ball ``B(0, R)`` under a stored
homeomorphism. Providers build sequences whose cells are star-shaped about
the origin, so each cell also has a radial extent function
``sigma_j(xi) = sup{r : r xi in cell j}``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .geometry import FilledEllipsoid, random_directions, sample_sphere
from .maps import AffineMap, InvertibleMap, Power


class NestingError(ValueError):
    """Raised when sampled cells fail ``C_{j+1} inside int(C_j)``."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"cell nesting violated at index {index}")


class CellSequence:
    """Ordered cells ``C_1 > C_2 > ...`` stored as homeomorphisms of ``B(0, R)``."""

    def __init__(self, cells: Sequence[InvertibleMap], R: float = 1.0, provider: dict | None = None):
        cells = list(cells)
        if not cells:
            raise ValueError("a cell sequence needs at least one cell")
        if len({c.dim for c in cells}) != 1:
            raise ValueError("cells must share one dimension")
        if not R > 0:
            raise ValueError("cell radius must be positive")
        self.cells = cells
        self.R = float(R)
        self.provider = provider or {"name": "custom"}

    def __len__(self):
        return len(self.cells)

    def __getitem__(self, j):
        return self.cells[j]

    @property
    def dim(self) -> int:
        return self.cells[0].dim

    def contains(self, j: int, points, margin: float = 0.0) -> np.ndarray:
        """Membership in cell ``j`` (0-based): ``|cell_j^-1(p)| <= R - margin``."""
        return np.linalg.norm(self.cells[j].inverse(np.atleast_2d(points)), axis=1) <= self.R - margin

    def boundary_samples(self, j: int, count: int, seed=0) -> np.ndarray:
        return self.cells[j](sample_sphere(self.dim, self.R, count, seed))

    def extents(self, directions, count: int | None = None) -> np.ndarray:
        """``(N, count)`` array of radial extents of the first ``count`` cells."""
        directions = np.atleast_2d(directions)
        count = len(self) if count is None else count
        return np.column_stack([c.ray_extent(directions, self.R) for c in self.cells[:count]])

    def outer_radius(self, j: int = 0, samples: int = 512, seed=0) -> float:
        """Largest norm of cell ``j`` (exact for linear cells, sampled otherwise)."""
        cell = self.cells[j]
        if isinstance(cell, AffineMap) and not np.any(cell.offset):
            return float(self.R * np.linalg.norm(cell.matrix, 2))
        if isinstance(cell, _Scaled) and isinstance(cell.base, AffineMap) and not np.any(cell.base.offset):
            return float(cell.factor * self.R * np.linalg.norm(cell.base.matrix, 2))
        r = np.linalg.norm(self.boundary_samples(j, samples, seed), axis=1).max()
        return float(r * (1 + 1e-3))

    def check_nesting(self, samples: int = 256, seed=0, margin: float = 0.0) -> None:
        """Boundary samples of each cell must lie inside the previous cell."""
        for j in range(1, len(self)):
            pts = self.boundary_samples(j, samples, seed)
            if not np.all(self.contains(j - 1, pts, margin)):
                raise NestingError(j, f"cell {j + 1} is not inside cell {j} on samples")

    def scaled(self, factor: float) -> "CellSequence":
        return CellSequence([_Scaled(c, factor) for c in self.cells], self.R,
                            {**self.provider, "scale": factor * self.provider.get("scale", 1.0)})

    def truncated(self, count: int) -> "CellSequence":
        return CellSequence(self.cells[:count], self.R, self.provider)

    def to_dict(self) -> dict:
        return {"provider": self.provider, "R": self.R, "count": len(self)}


class _Scaled(InvertibleMap):
    """``x -> factor * base(x)``; keeps the base's closed-form extents."""

    kind = "composition"

    def __init__(self, base: InvertibleMap, factor: float):
        super().__init__(base.dim)
        self.base = base
        self.factor = float(factor)

    def _forward(self, x):
        return self.factor * self.base._forward(x)

    def _backward(self, y):
        return self.base._backward(y / self.factor)

    def ray_extent(self, directions, radius):
        return self.factor * self.base.ray_extent(directions, radius)


class StarMap(InvertibleMap):
    """Ray-preserving map ``x -> scale * shape(x/|x|) * x`` for a positive,
    continuous ``shape`` on the unit sphere."""

    kind = "radial"

    def __init__(self, shape: Callable, scale: float, dim: int):
        super().__init__(dim)
        self.shape = shape
        self.scale = float(scale)

    def _factor(self, x):
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0, r, 1.0)
        xi = x / safe[:, None]
        xi[r == 0] = 0.0
        xi[r == 0, 0] = 1.0
        return self.scale * np.asarray(self.shape(xi), dtype=float)

    def _forward(self, x):
        return x * self._factor(x)[:, None]

    def _backward(self, y):
        return y / self._factor(y)[:, None]

    def ray_extent(self, directions, radius):
        return radius * self._factor(np.atleast_2d(directions))


def angular_shape(values) -> Callable:
    """Periodic piecewise-linear shape function on the circle from values on
    an equispaced angle grid (planar star-shaped cells)."""
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        raise ValueError("shape values must be positive")
    n = len(values)
    grid = np.linspace(0.0, 2 * np.pi, n + 1)
    closed = np.append(values, values[0])

    def shape(xi):
        ang = np.mod(np.arctan2(xi[:, 1], xi[:, 0]), 2 * np.pi)
        return np.interp(ang, grid, closed)

    return shape


# ---------------------------------------------------------------------------
# Providers


def round_cells(radii, dim: int) -> CellSequence:
    radii = [float(r) for r in radii]
    cells = [AffineMap.scaling(r, dim) for r in radii]
    return CellSequence(cells, 1.0, {"name": "round", "radii": radii, "dim": dim})


def geometric_round_cells(first: float, ratio: float, count: int, dim: int) -> CellSequence:
    return round_cells([first * ratio**j for j in range(count)], dim)


def ellipsoid_cells(matrices) -> CellSequence:
    cells = [AffineMap(m) for m in matrices]
    return CellSequence(cells, 1.0, {"name": "ellipsoid", "matrices": [c.matrix.tolist() for c in cells]})


def neighbourhood_cells(body: FilledEllipsoid, thicknesses) -> CellSequence:
    """Ellipsoidal cells shrinking onto a centered filled ellipsoid.

    Cell ``j`` has semi-axes ``s_i + t_j`` along the body's axes and ``t_j``
    across them, so it lies within distance ``t_j`` of the body.
    """
    if np.any(body.center):
        raise ValueError("neighbourhood cells need a body centered at the origin")
    t = np.asarray(thicknesses, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("thicknesses must be positive and strictly decreasing")
    q, s = body.axes, body.semi_axes
    proj = q @ q.T
    eye = np.eye(body.dim)
    mats = [q @ np.diag(s + tj) @ q.T + tj * (eye - proj) for tj in t]
    seq = ellipsoid_cells(mats)
    seq.provider = {"name": "neighbourhood", "body": body.to_dict(), "thicknesses": t.tolist()}
    return seq


def star_cells(shape: Callable, radii, dim: int, name: str = "star") -> CellSequence:
    cells = [StarMap(shape, r, dim) for r in radii]
    return CellSequence(cells, 1.0, {"name": name, "radii": [float(r) for r in radii]})


def homeomorphism_cells(homeo: InvertibleMap, n: int, count: int, R: float) -> CellSequence:
    cells = [Power(homeo, n * j) for j in range(1, count + 1)]
    return CellSequence(cells, R, {"name": "homeomorphism", "n": n})


def cells_from_dict(data: dict) -> CellSequence:
    """Rebuild a sequence from a serializable provider record."""
    prov = data["provider"]
    name = prov["name"]
    if name == "round":
        seq = round_cells(prov["radii"], prov["dim"])
    elif name == "ellipsoid":
        seq = ellipsoid_cells(prov["matrices"])
    elif name == "neighbourhood":
        seq = neighbourhood_cells(FilledEllipsoid.from_dict(prov["body"]), prov["thicknesses"])
    else:
        raise ValueError(f"cell provider {name!r} cannot be rebuilt from JSON")
    if "scale" in prov:
        seq = seq.scaled(prov["scale"])
    return seq


def sample_directions(dim: int, count: int, seed=0) -> np.ndarray:
    """Random unit directions plus the coordinate axes (both signs)."""
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([axes, random_directions(dim, count, seed)])
