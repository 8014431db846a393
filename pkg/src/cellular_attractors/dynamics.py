"""Sampled discrete dynamics: omega-limits, attractor truncations, cell
sequences generated by an absorbing homeomorphism, and the contraction
witness for semiflow attractors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .cells import CellSequence, homeomorphism_cells
from .geometry import as_cloud, hausdorff_semidist, sample_ball, sample_sphere
from .maps import FunctionPair, InvertibleMap

DIVERGENCE_BOUND = 1e6


class OrbitDivergenceError(RuntimeError):
    def __init__(self, index: int, step: int, norm: float):
        self.index, self.step, self.norm = index, step, norm
        super().__init__(f"orbit of sample {index} escaped (|x| = {norm:.3g}) at step {step}")


class NotAbsorbingError(RuntimeError):
    pass


class AttractionTimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampledSystem:
    """Paired samples ``(x_i, F(x_i))`` on a compact set, with optional
    closed-form forward and inverse evaluators."""

    domain: np.ndarray
    image: np.ndarray
    evaluator: Callable | None = None
    inverse_evaluator: Callable | None = None
    name: str = ""
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        domain = as_cloud(self.domain)
        image = as_cloud(self.image, dim=domain.shape[1])
        if len(domain) != len(image):
            raise ValueError("domain and image must pair up one to one")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "image", image)
        scale = max(1.0, float(np.abs(domain).max()), float(np.abs(image).max()))
        if self.evaluator is not None:
            err = np.abs(np.asarray(self.evaluator(domain)) - image).max()
            if err > self.tol * scale:
                raise ValueError(f"evaluator disagrees with stored images by {err:.3g}")
        if self.inverse_evaluator is not None:
            err = np.abs(np.asarray(self.inverse_evaluator(image)) - domain).max()
            if err > 1e-9 * scale:
                raise ValueError(f"inverse evaluator disagrees with stored samples by {err:.3g}")

    @classmethod
    def from_map(cls, m, domain, name: str = "") -> "SampledSystem":
        domain = as_cloud(domain, dim=m.dim)
        inverse = m.inverse if isinstance(m, InvertibleMap) else None
        return cls(domain, m(domain), m, inverse, name or getattr(m, "name", ""))

    @property
    def dim(self) -> int:
        return self.domain.shape[1]

    def swapped(self) -> "SampledSystem":
        """The inverse system, pairing images back to their preimages."""
        return SampledSystem(self.image, self.domain, self.inverse_evaluator, self.evaluator,
                             self.name + "^-1", tol=1e-9)

    def as_map(self) -> InvertibleMap:
        if self.evaluator is None or self.inverse_evaluator is None:
            raise ValueError("a homeomorphism needs both evaluators")
        if isinstance(self.evaluator, InvertibleMap):
            return self.evaluator
        return FunctionPair(self.evaluator, self.inverse_evaluator, self.dim, self.name)


def _iterate(F, x, steps, bound, start_step=0):
    for step in range(steps):
        x = np.asarray(F(x), dtype=float)
        norms = np.linalg.norm(x, axis=1)
        bad = ~(norms <= bound)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise OrbitDivergenceError(i, start_step + step + 1, float(norms[i]))
    return x


def orbit(F, x0, steps: int, bound: float = DIVERGENCE_BOUND) -> np.ndarray:
    """``(steps + 1, N, dim)`` array of iterates ``F^n(x0)``."""
    x = as_cloud(x0)
    out = [x]
    for n in range(steps):
        x = _iterate(F, x, 1, bound, n)
        out.append(x)
    return np.stack(out)


def cluster_points(points, tol: float):
    """Single-linkage components at radius ``tol``, each thinned to a
    ``tol``-net. Returns ``(representatives, labels)``; earlier points are
    preferred as representatives."""
    points = as_cloud(points)
    tree = cKDTree(points)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    covered = np.zeros(n, dtype=bool)
    keep = []
    for i in range(n):
        if covered[i]:
            continue
        keep.append(i)
        covered[tree.query_ball_point(points[i], tol)] = True
    return points[keep], labels


def omega_limit(system: SampledSystem, B, burn_in: int = 200, window: int = 50,
                cluster_tol: float = 1e-3, bound: float = DIVERGENCE_BOUND) -> np.ndarray:
    """Clustered accumulation points of ``{F^n(b) : burn_in <= n < burn_in + window}``."""
    if system.evaluator is None:
        raise ValueError("omega_limit needs an evaluator")
    if burn_in < 1 or window < 1:
        raise ValueError("burn_in and window must be >= 1")
    F = system.evaluator
    x = _iterate(F, as_cloud(B, dim=system.dim), burn_in, bound)
    tail = [x]
    for n in range(1, window):
        x = _iterate(F, x, 1, bound, burn_in + n)
        tail.append(x)
    # most recent iterates first, so representatives are the most converged
    pooled = np.vstack(tail[::-1])
    reps, _ = cluster_points(pooled, cluster_tol)
    return reps


def certify_attractor(system: SampledSystem, K, j_max: int, bound: float = DIVERGENCE_BOUND,
                      return_history: bool = False):
    """``F^{j_max}(K)``, the finite truncation of ``A = cap_j F^j(K)``.

    With ``return_history`` the semidistances ``dist(F^{j+1}K, F^j K)`` are
    returned as well; they decrease in the attracting regime.
    """
    if system.evaluator is None:
        raise ValueError("certify_attractor needs an evaluator")
    x = as_cloud(K, dim=system.dim)
    history = []
    for j in range(j_max):
        nxt = _iterate(system.evaluator, x, 1, bound, j)
        if return_history:
            history.append(hausdorff_semidist(nxt, x))
        x = nxt
    return (x, history) if return_history else x


def cells_from_homeomorphism(system: SampledSystem, R: float, j_count: int, n_cap: int = 64,
                             samples: int = 512, seed=0, margin: float = 1e-9) -> CellSequence:
    """Cells ``C_j = F^{nj}(closed ball(0, R))`` for the least sampled
    absorbing exponent ``n``."""
    F = system.as_map()
    probe = np.vstack([sample_sphere(system.dim, R, samples, seed),
                       sample_ball(system.dim, R, samples, seed + 1)])
    x = probe
    for n in range(1, n_cap + 1):
        x = F(x)
        if np.linalg.norm(x, axis=1).max() < R * (1 - margin):
            seq = homeomorphism_cells(F, n, j_count, R)
            seq.provider["system"] = system.name
            seq.check_nesting(samples=min(samples, 256), seed=seed)
            return seq
    raise NotAbsorbingError(f"not verifiably absorbing at radius R={R} (n <= {n_cap})")


@dataclass(frozen=True)
class SemiflowWitness:
    """Contraction of the attractor inside a neighbourhood:
    ``(p, t) -> S(2Tt)p`` for ``t <= 1/2`` and ``S(T)(q + (2 - 2t)(p - q))`` after."""

    T: float
    q: np.ndarray
    semiflow: Callable

    def __call__(self, p, t):
        p = np.atleast_2d(np.asarray(p, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(p),))
        out = np.empty_like(p)
        first = t <= 0.5
        if np.any(first):
            out[first] = self.semiflow(2 * self.T * t[first], p[first])
        if np.any(~first):
            s = 2 * t[~first] - 1
            g = self.q + (1 - s)[:, None] * (p[~first] - self.q)
            out[~first] = self.semiflow(np.full(len(g), self.T), g)
        return out

    def first_branch(self, p, t):
        p = np.atleast_2d(p)
        return self.semiflow(2 * self.T * np.broadcast_to(t, (len(p),)), p)

    def second_branch(self, p, t):
        p = np.atleast_2d(p)
        s = 2 * np.broadcast_to(np.asarray(t, dtype=float), (len(p),)) - 1
        g = self.q + (1 - s)[:, None] * (p - self.q)
        return self.semiflow(np.full(len(g), self.T), g)


def contraction_witness(semiflow: Callable, A, q_index: int, U_radius: float,
                        t_samples: int = 21, T_cap: float = 2.0**64) -> SemiflowWitness:
    """Find ``T`` by doubling from 1 so that ``S(T)`` maps the straight-line
    contraction of ``A`` onto ``q`` into ``N(A, U_radius)``."""
    A = as_cloud(A)
    if not 0 <= q_index < len(A):
        raise IndexError("q_index out of range")
    q = A[q_index].copy()
    ts = np.linspace(0.0, 1.0, t_samples)
    P = np.repeat(A, len(ts), axis=0)
    S = np.tile(ts, len(A))
    G = q + (1 - S)[:, None] * (P - q)
    T = 1.0
    while T <= T_cap:
        img = semiflow(np.full(len(G), T), G)
        if np.all(np.isfinite(img)) and hausdorff_semidist(img, A) <= U_radius:
            return SemiflowWitness(T, q, semiflow)
        T *= 2
    raise AttractionTimeError("attraction time not found")
