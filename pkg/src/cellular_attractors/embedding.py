"""Generic linear embedding of a sampled compact set into R^(2k+1), the
padding step into R^(2k+2), and transport of sampled dynamics along it."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .dynamics import SampledSystem
from .geometry import as_cloud, pad_zeros, rng

log = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    def __init__(self, message: str, best_margin: float):
        self.best_margin = best_margin
        super().__init__(f"{message} (best margin {best_margin:.3g})")


class Embedding:
    """``e(x) = M x + offset`` with a nearest-anchor inverse on the samples.

    Attributes
    ----------
    matrix : (2k+1, ambient) array
    offset : (2k+1,) array
    k : int
    injectivity_margin : float
        ``min |e(x) - e(y)| / |x - y|`` over distinct sample pairs.
    """

    def __init__(self, matrix, offset, k: int, anchors, margin: float, seed=None):
        self.matrix = np.asarray(matrix, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        self.k = int(k)
        self.anchors = as_cloud(anchors)
        self.injectivity_margin = float(margin)
        self.seed = seed
        self.images = self(self.anchors)
        self._tree = cKDTree(self.images)

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T + self.offset

    def inverse(self, y):
        """Stored anchor whose image is nearest to ``y`` (exact on images)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        _, idx = self._tree.query(y)
        return self.anchors[idx]

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "offset": self.offset.tolist(), "k": self.k,
                "margin": _finite(self.injectivity_margin), "seed": self.seed}


def _finite(x):
    """JSON-safe float: infinite margins (fewer than two samples) become None."""
    return float(x) if np.isfinite(x) else None


def injectivity_margin(X, matrix) -> float:
    X = as_cloud(X)
    if len(X) < 2:
        return float("inf")
    return float(np.min(pdist(X @ np.asarray(matrix).T) / pdist(X)))


def _candidate(gen, target, ambient):
    a = gen.standard_normal((max(target, ambient), min(target, ambient)))
    q, _ = np.linalg.qr(a)
    # orthonormal rows when reducing dimension, orthonormal columns otherwise
    return q.T if target <= ambient else q


def embed(X, k: int, attempts: int = 20, seed=0, margin_floor: float = 1e-4,
          center=None) -> Embedding:
    """Linear embedding into R^(2k+1) with sample margin above ``margin_floor``.

    With ``center`` the embedded set is shifted so ``e(center) = 0``.
    """
    X = as_cloud(X)
    if k < 0:
        raise ValueError("k must be >= 0")
    if len({row.tobytes() for row in X}) != len(X):
        raise EmbeddingError("duplicate samples cannot be embedded injectively", 0.0)
    target, ambient = 2 * k + 1, X.shape[1]
    gen = rng(seed)
    best = -np.inf
    for attempt in range(attempts):
        if attempt == 0 and target == ambient:
            M = np.eye(target)
        else:
            M = _candidate(gen, target, ambient)
        margin = injectivity_margin(X, M)
        best = max(best, margin)
        if margin > margin_floor:
            c = np.zeros(ambient) if center is None else np.asarray(center, dtype=float)
            log.info("embedding accepted after %d attempt(s), margin %.3g", attempt + 1, margin)
            return Embedding(M, -(M @ c), k, X, margin, seed)
        log.info("embedding attempt %d rejected, margin %.3g", attempt + 1, margin)
    raise EmbeddingError(f"margin floor {margin_floor} not reached in {attempts} attempts", best)


def pad_dimension(e_image, extra: int = 1) -> np.ndarray:
    """Append ``extra`` zero coordinates to every point."""
    return pad_zeros(e_image, extra)


def conjugate_system(F: SampledSystem, e: Embedding, margin_floor: float = 1e-4) -> SampledSystem:
    """Paired samples ``(e(x_i), e(F(x_i)))``."""
    if e.injectivity_margin <= margin_floor:
        raise EmbeddingError("embedding too close to non-injective for conjugation", e.injectivity_margin)
    for cloud in (F.domain, F.image):
        if injectivity_margin(cloud, e.matrix) <= margin_floor:
            raise EmbeddingError("embedding is not injective on the system samples",
                                 injectivity_margin(cloud, e.matrix))
    return SampledSystem(e(F.domain), e(F.image), name=f"e.{F.name}" if F.name else "e.F")
