"""Doubling-dimension extension of a sampled homeomorphism.

A homeomorphism ``f`` of a compact ``X`` in R^n becomes a homeomorphism of
R^2n that agrees with ``(f(x), 0)`` on ``X x {0}``:

    f1(x, y) = (x, y + phi(x))          f1^-1(x, y) = (x, y - phi(x))
    f2(x, y) = (2y + psi(x), x)         f2^-1(x, y) = (y, (x - psi(y))/2)
    fhat = (c, c) o f2^-1 o f1

with ``phi`` and ``psi`` extending ``f`` and ``f^-1`` and ``c`` the radial
compress map that is the identity near ``X`` and halves norms far out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SampledSystem
from .extension import ExtensionOperator, extend
from .geometry import RadialProfile
from .maps import BlockProduct, Composition, InvertibleMap, Inverted, RadialMap


def build_compress(R_star: float, R: float, n: int) -> RadialMap:
    """Radial map with ``theta(r) = r`` on ``[0, R*]``, linear on ``[R*, 2R]``
    and ``theta(r) = r/2`` beyond ``2R``."""
    if not 0 < R_star < R:
        raise ValueError(f"need 0 < R* < R, got R*={R_star}, R={R}")
    return RadialMap(RadialProfile([(R_star, R_star), (2 * R, R)], tail_slope=0.5), n)


class KleeShear(InvertibleMap):
    """``(x, y) -> (x, y + phi(x))``."""

    kind = "shear_klee_f1"

    def __init__(self, phi: ExtensionOperator):
        super().__init__(2 * phi.dim)
        self.phi = phi
        self.n = phi.dim

    def _forward(self, p):
        x, y = p[:, :self.n], p[:, self.n:]
        return np.hstack([x, y + self.phi(x)])

    def _backward(self, p):
        x, y = p[:, :self.n], p[:, self.n:]
        return np.hstack([x, y - self.phi(x)])


class KleeSwapScale(InvertibleMap):
    """``(x, y) -> (2y + psi(x), x)``."""

    kind = "swapscale_klee_f2"

    def __init__(self, psi: ExtensionOperator):
        super().__init__(2 * psi.dim)
        self.psi = psi
        self.n = psi.dim

    def _forward(self, p):
        x, y = p[:, :self.n], p[:, self.n:]
        return np.hstack([2 * y + self.psi(x), x])

    def _backward(self, p):
        x, y = p[:, :self.n], p[:, self.n:]
        return np.hstack([y, 0.5 * (x - self.psi(y))])


@dataclass
class KleeExtension:
    phi: ExtensionOperator
    psi: ExtensionOperator
    c: RadialMap
    n: int
    R: float
    R_star: float
    f1: KleeShear
    f2: KleeSwapScale
    g: InvertibleMap
    fhat: InvertibleMap

    def __call__(self, p):
        return self.fhat(p)

    def inverse(self, p):
        return self.fhat.inverse(p)

    def blocks(self, p):
        """Norms of the two ``n``-blocks of ``p``."""
        p = np.atleast_2d(p)
        return np.linalg.norm(p[:, :self.n], axis=1), np.linalg.norm(p[:, self.n:], axis=1)

    def to_dict(self) -> dict:
        return {"n": self.n, "R": self.R, "R_star": self.R_star, "phi": self.phi.to_dict(),
                "psi": self.psi.to_dict(), "compress": self.c.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "KleeExtension":
        return klee_from_extensions(ExtensionOperator.from_dict(data["phi"]),
                                    ExtensionOperator.from_dict(data["psi"]), data["R"], data["R_star"])


def klee_from_extensions(phi, psi, R: float, R_star: float) -> KleeExtension:
    """Assemble the extension from any pair of continuous extensions of
    ``f`` and ``f^-1`` (objects with ``dim`` and a vectorized call)."""
    n = phi.dim
    c = build_compress(R_star, R, n)
    f1, f2 = KleeShear(phi), KleeSwapScale(psi)
    g = Composition([Inverted(f2), f1])
    fhat = Composition([BlockProduct([c, c]), Inverted(f2), f1])
    return KleeExtension(phi, psi, c, n, float(R), float(R_star), f1, f2, g, fhat)


def klee_extend(f_system: SampledSystem, R: float, **extension_kwargs) -> KleeExtension:
    """Lift the sampled homeomorphism to R^2n; ``fhat(x, 0) = (phi(x), 0)``."""
    dom, img = f_system.domain, f_system.image
    reach = max(np.linalg.norm(dom, axis=1).max(), np.linalg.norm(img, axis=1).max())
    if not reach < R:
        raise ValueError(f"samples must lie inside B(0, {R}); largest norm is {reach:.6g}")
    phi = extend(dom, img, R, **extension_kwargs)
    psi = extend(img, dom, R, **extension_kwargs)
    R_star = 0.5 * (reach + R)
    return klee_from_extensions(phi, psi, R, R_star)


def klee_inverse_eval(ext: KleeExtension, p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2 * ext.n:
        raise ValueError(f"expected dimension {2 * ext.n}")
    return ext.inverse(p)
