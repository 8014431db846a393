"""Continuous extension of a sampled map to all of R^n, equal to the identity
outside a ball.

Inside an inner ball the extension is the inverse-distance (Shepard)
interpolant of the anchor values. The inner radius is ``(1 - margin) R``,
pushed out to the outermost anchor when that is larger. On the shell up to
``R`` it is blended linearly in ``|p|`` with the identity, and outside it is
the identity.
"""

from __future__ import annotations

import numpy as np

from .geometry import as_cloud


class ExtensionOperator:
    """Shepard interpolant of ``anchors -> values`` blended into the identity.

    Parameters
    ----------
    anchors, values : (N, dim) arrays
        Distinct anchors strictly inside ``B(0, R)`` and their images.
    R : float
        The operator is the identity on ``|p| >= R``.
    blend_margin : float in (0, 1)
        Relative width of the blending shell.
    shepard_power : float >= 2
        Exponent of the inverse-distance weights.
    """

    def __init__(self, anchors, values, R: float, blend_margin: float = 0.2,
                 shepard_power: float = 4.0, chunk: int = 4096):
        anchors = as_cloud(anchors)
        values = as_cloud(values, dim=anchors.shape[1])
        if len(values) != len(anchors):
            raise ValueError("anchors and values must pair up")
        if not R > 0:
            raise ValueError("R must be positive")
        if not 0 < blend_margin < 1:
            raise ValueError("blend_margin must lie in (0, 1)")
        if shepard_power < 2:
            raise ValueError("shepard_power must be >= 2")
        if np.linalg.norm(anchors, axis=1).max() >= R:
            raise ValueError("anchors must lie strictly inside B(0, R)")
        keys = {row.tobytes() for row in anchors}
        if len(keys) != len(anchors):
            raise ValueError("duplicate anchors")
        self.anchors = anchors
        self.values = values
        self.R = float(R)
        self.blend_margin = float(blend_margin)
        self.shepard_power = float(shepard_power)
        self._chunk = chunk
        # the shell starts beyond the outermost anchor so anchors stay exact
        self.inner_radius = max((1 - self.blend_margin) * self.R,
                                float(np.linalg.norm(anchors, axis=1).max()))

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def shepard(self, points) -> np.ndarray:
        """Pure inverse-distance interpolant; exact at anchors."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty_like(pts)
        for lo in range(0, len(pts), self._chunk):
            block = pts[lo:lo + self._chunk]
            d2 = np.zeros((len(block), len(self.anchors)))
            for k in range(self.dim):
                diff = block[:, k, None] - self.anchors[None, :, k]
                d2 += diff * diff
            dmin2 = d2.min(axis=1, keepdims=True)
            hit = dmin2[:, 0] == 0.0
            # weights relative to the nearest anchor: no overflow near anchors
            with np.errstate(divide="ignore", invalid="ignore"):
                w = (dmin2 / d2) ** (self.shepard_power / 2)
            w[hit] = 0.0
            if np.any(hit):
                w[hit, np.argmin(d2[hit], axis=1)] = 1.0
            out[lo:lo + self._chunk] = (w @ self.values) / w.sum(axis=1, keepdims=True)
        return out

    def blend_weight(self, r) -> np.ndarray:
        """Identity weight: 0 inside the inner ball, 1 at and beyond ``R``."""
        inner = self.inner_radius
        return np.clip((np.asarray(r, dtype=float) - inner) / (self.R - inner), 0.0, 1.0)

    def __call__(self, points):
        arr = np.asarray(points, dtype=float)
        single = arr.ndim == 1
        pts = np.atleast_2d(arr)
        if pts.shape[1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}")
        out = pts.copy()
        r = np.linalg.norm(pts, axis=1)
        inside = r < self.R
        if np.any(inside):
            p = pts[inside]
            lam = self.blend_weight(r[inside])[:, None]
            s = self.shepard(p)
            out[inside] = np.where(lam > 0, lam * p + (1 - lam) * s, s)
        return out[0] if single else out

    def continuity_probe(self, spacing: float = 0.05, radius: float | None = None) -> float:
        """Largest difference quotient between grid neighbours (a reported
        constant, not a certified modulus)."""
        radius = 1.1 * self.R if radius is None else radius
        axis = np.arange(-radius, radius + spacing / 2, spacing)
        if self.dim > 3:
            raise ValueError("grid probe is limited to dimension <= 3")
        grid = np.stack(np.meshgrid(*[axis] * self.dim, indexing="ij"), axis=-1)
        vals = self(grid.reshape(-1, self.dim)).reshape(grid.shape)
        worst = 0.0
        for k in range(self.dim):
            dv = np.diff(vals, axis=k)
            worst = max(worst, float(np.linalg.norm(dv, axis=-1).max() / spacing))
        return worst

    def to_dict(self) -> dict:
        return {"anchors": self.anchors.tolist(), "values": self.values.tolist(), "R": self.R,
                "blend_margin": self.blend_margin, "shepard_power": self.shepard_power}

    @classmethod
    def from_dict(cls, data: dict) -> "ExtensionOperator":
        return cls(data["anchors"], data["values"], data["R"], data["blend_margin"],
                   data["shepard_power"])


def extend(anchors, values, R: float, **kwargs) -> ExtensionOperator:
    return ExtensionOperator(anchors, values, R, **kwargs)


def extension_eval(op: ExtensionOperator, p):
    return op(p)
