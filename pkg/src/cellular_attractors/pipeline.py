"""End-to-end construction of a homeomorphism of R^(4k+4) whose global
attractor contains an embedded copy of a given sampled attractor.

Stages: embed into R^(2k+1), pad to R^(2k+2), build the cellular attractor
map ``h`` there, lift the conjugated dynamics with the Klee extension
``fhat1``, and set ``f = hhat^m o fhat1`` with ``hhat(x, y) = (h(x), y/2)``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cells import neighbourhood_cells
from .dynamics import SampledSystem
from .embedding import Embedding, _finite, conjugate_system, embed, pad_dimension
from .garay import GarayMap, garay_map, modulus_violations
from .geometry import FilledEllipsoid, hausdorff_semidist, sample_ball, sample_sphere
from .klee import KleeExtension, klee_extend
from .maps import AffineMap, BlockProduct, Composition, InvertibleMap, Power
from .systems import arc_morse, disk_rotation, fixed_point

log = logging.getLogger(__name__)

SEED_ENV = "CELLULAR_ATTRACTORS_SEED"


# ---------------------------------------------------------------------------
# Demo registry


@dataclass
class Demo:
    """Sampled homeomorphism of a compact attractor.

    ``F(points[dom[i]]) = points[img[i]]``; ``shape`` is the exact attractor.
    """

    name: str
    points: np.ndarray
    dom: np.ndarray
    img: np.ndarray
    shape: FilledEllipsoid
    k: int
    system: InvertibleMap
    description: str = ""

    @property
    def sampled(self) -> SampledSystem:
        return SampledSystem(self.points[self.dom], self.points[self.img], self.system,
                             name=self.name)


def _demo_fixed_point(ambient_dim=3, point=None):
    m = fixed_point(ambient_dim, point)
    p = m.attractor.center[None, :]
    return Demo("fixed_point", p, np.array([0]), np.array([0]), m.attractor, 0, m,
                "a single fixed point in R^3")


def _demo_arc_morse(ambient_dim=4, half_length=0.5, seed=11, orbit_length=12, seeds=6):
    m = arc_morse(ambient_dim, half_length, seed)
    L, v, c = half_length, m.axis, m.attractor.center
    # orbits through a fundamental interval of t -> t - (1 - t^2)/4
    ts, dom, img = [1.0, -1.0], [0, 1], [0, 1]
    for i in range(seeds):
        t0 = -0.25 + 0.25 * i / seeds
        back = [t0]
        for _ in range(orbit_length):
            back.append(float(m.along_inverse(np.array(back[-1]))))
        fwd = [t0]
        for _ in range(orbit_length):
            fwd.append(float(m.along(np.array(fwd[-1]))))
        orbit = back[::-1] + fwd[1:]
        base = len(ts)
        ts.extend(orbit)
        dom.extend(range(base, base + len(orbit) - 1))
        img.extend(range(base + 1, base + len(orbit)))
    pts = c + L * np.asarray(ts)[:, None] * v[None, :]
    return Demo("arc_morse", pts, np.asarray(dom), np.asarray(img), m.attractor, 1, m,
                "north-south dynamics on an arc in R^4")


def _demo_disk_rotation(ambient_dim=20, radius=0.5, seed=7, rings=4, spokes=24, step=5):
    angle = 2 * np.pi * step / spokes
    m = disk_rotation(ambient_dim, radius, angle, seed)
    P = m.plane
    pts, dom, img = [np.zeros(2)], [0], [0]
    for i in range(1, rings + 1):
        for j in range(spokes):
            a = 2 * np.pi * j / spokes
            pts.append(radius * i / rings * np.array([np.cos(a), np.sin(a)]))
            base = 1 + (i - 1) * spokes
            dom.append(base + j)
            img.append(base + (j + step) % spokes)
    pts = m.attractor.center + np.asarray(pts) @ P.T
    return Demo("disk_rotation", pts, np.asarray(dom), np.asarray(img), m.attractor, 2, m,
                "rigid rotation of a flat 2-disk in R^20")


DEMOS = {
    "fixed_point": _demo_fixed_point,
    "arc_morse": _demo_arc_morse,
    "disk_rotation": _demo_disk_rotation,
}


def make_demo(name: str, **params) -> Demo:
    try:
        factory = DEMOS[name]
    except KeyError:
        raise ValueError(f"unknown demo {name!r}; known: {sorted(DEMOS)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# Configuration and results


@dataclass
class PipelineConfig:
    demo: str = "fixed_point"
    demo_params: dict = field(default_factory=dict)
    k: int | None = None
    epsilon: float = 0.2
    R: float = 1.0
    m_cap: int = 400
    seed: int = 0
    J: int = 20
    K_depth: int = 8
    cell_thickness: float = 0.2
    embed_attempts: int = 20
    margin_floor: float = 1e-4
    epsilon_policy: str = "reduce"
    m_margin: float = 0.9
    select_samples: int = 500
    conjugacy_tol: float = 1e-6
    invariance_samples: int = 1000
    rate_radii: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 3.0, 4.0])
    rate_samples: int = 200
    attraction_radii: list = field(default_factory=lambda: [1.0, 2.0, 4.0])
    attraction_samples: int = 20
    attraction_slack: int = 1
    j_max: int = 5
    truncation_samples: int = 500
    cluster_tol: float = 1e-6
    roundtrip_samples: int = 1000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if self.epsilon_policy not in ("reduce", "fail"):
            raise ValueError("epsilon_policy must be 'reduce' or 'fail'")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerificationReport:
    conjugacy_error: float
    conjugacy_tol: float
    positive_invariance_violations: int
    invariance_samples: int
    attraction_steps: dict
    attraction_violations: int
    rate_check: dict
    truncation_semidist: float
    truncation_inside: bool
    anchors_in_truncation: float
    anchors_checked: int
    cluster_tol: float
    round_trip: dict
    margins: dict

    @property
    def violations(self) -> int:
        n = self.positive_invariance_violations + self.attraction_violations
        n += self.rate_check["violations"]
        n += int(self.conjugacy_error > self.conjugacy_tol)
        n += int(not self.truncation_inside)
        n += int(self.anchors_in_truncation > self.cluster_tol)
        return n

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {**asdict(self), "violations": self.violations}


@dataclass
class PipelineResult:
    config: PipelineConfig
    demo: Demo
    e: Embedding
    X1: np.ndarray
    A: FilledEllipsoid
    h: GarayMap
    fhat1: KleeExtension
    hhat: InvertibleMap
    m: int
    f: InvertibleMap
    epsilon: float
    m_selection: dict
    report: VerificationReport | None = None
    tables: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.X1.shape[1]


# ---------------------------------------------------------------------------
# Stage operations


def build_hhat(h: InvertibleMap, n: int) -> InvertibleMap:
    """``(x, y) -> (h(x), y/2)`` on R^n x R^n."""
    if h.dim != n:
        raise ValueError(f"h acts on R^{h.dim}, expected R^{n}")
    return BlockProduct([h, AffineMap.scaling(0.5, n)])


def block_norms(p, n: int):
    p = np.atleast_2d(p)
    return np.linalg.norm(p[:, :n], axis=1), np.linalg.norm(p[:, n:], axis=1)


def product_samples(n: int, r: float, count: int, seed) -> np.ndarray:
    """Half on the torus ``|x| = |y| = r``, half in ``B(0, r) x B(0, r)``."""
    a, b = count // 2, count - count // 2
    sph = np.hstack([sample_sphere(n, r, a, seed), sample_sphere(n, r, a, seed + 1)])
    ball = np.hstack([sample_ball(n, r, b, seed + 2), sample_ball(n, r, b, seed + 3)])
    return np.vstack([sph, ball])


def reduce_epsilon(epsilon: float, R: float, R_A: float, policy: str = "reduce") -> float:
    """Largest usable radius with ``N(A, eps)`` inside ``B(0, R) x B(0, R)``."""
    limit = R - R_A
    if not limit > 0:
        raise ValueError("the attractor must lie strictly inside B(0, R)")
    if epsilon <= limit:
        return float(epsilon)
    if policy == "fail":
        raise ValueError(f"epsilon={epsilon} too large; N(A, eps) leaves B(0, R) beyond {limit}")
    warnings.warn(f"epsilon reduced from {epsilon} to {limit}", stacklevel=2)
    return float(limit)


def select_m(hhat: InvertibleMap, R: float, epsilon: float, m_cap: int, distance_to_A,
             samples: int = 500, seed=0, margin: float = 0.9):
    """Least ``m <= m_cap`` with ``hhat^m`` of seeded samples of
    ``B(0, R) x B(0, R)`` within ``margin * epsilon`` of ``A``.

    Returns ``(m, history)`` with the sampled worst distance per ``m``.
    """
    n = hhat.dim // 2
    x = product_samples(n, R, samples, seed)
    history = []
    for m in range(1, m_cap + 1):
        x = hhat(x)
        worst = float(np.max(distance_to_A(x)))
        history.append(worst)
        if worst < margin * epsilon:
            return m, history
    raise RuntimeError(f"m_cap={m_cap} exceeded; best containment distance {min(history):.4g} "
                       f"against target {margin * epsilon:.4g}")


def phi_rate(r, R: float, m: int, rho: float):
    """``max(r - m rho, r/2^m, R)``."""
    return np.maximum(np.maximum(np.asarray(r, dtype=float) - m * rho, np.asarray(r) / 2.0**m), R)


def phi_steps(r0: float, R: float, m: int, rho: float, cap: int = 10**7) -> int:
    """Least ``n`` with ``phi^n(r0) = R``."""
    r, n = float(r0), 0
    while r > R:
        r = float(phi_rate(r, R, m, rho))
        n += 1
        if n > cap:
            raise RuntimeError("phi iteration did not reach R")
    return n


def phi_steps_analytic(r0: float, R: float, m: int, rho: float) -> int:
    """Upper bound for :func:`phi_steps`: every step above ``R`` lowers ``r``
    by at least ``min(m rho, R (1 - 2^-m))``."""
    if r0 <= R:
        return 0
    return math.ceil((r0 - R) / min(m * rho, R * (1 - 2.0**-m)))


def verify_rate(f: InvertibleMap, R: float, m: int, rho: float, radii, samples: int = 200,
                seed=0, tol: float = 1e-9) -> dict:
    """Count samples with an output block norm above ``phi(r) + tol``."""
    n = f.dim // 2
    rows, total = [], 0
    for i, r in enumerate(radii):
        p = product_samples(n, r, samples, seed + 10 * i)
        bx, by = block_norms(f(p), n)
        bound = float(phi_rate(r, R, m, rho))
        bad = int(np.sum((bx > bound + tol) | (by > bound + tol)))
        total += bad
        rows.append({"radius": float(r), "phi": bound, "max_x": float(bx.max()),
                     "max_y": float(by.max()), "samples": len(p), "violations": bad})
    return {"rows": rows, "violations": total}


def attraction_steps(f: InvertibleMap, R: float, radius: float, count: int, seed=0,
                     horizon: int = 10_000):
    """Iterations until both blocks are within ``R``; also the norm trajectories."""
    n = f.dim // 2
    x = np.hstack([sample_sphere(n, radius, count, seed), sample_sphere(n, radius, count, seed + 1)])
    steps = np.full(count, -1)
    norms = [np.maximum(*block_norms(x, n))]
    inside = norms[0] <= R * (1 + 1e-12)
    steps[inside] = 0
    for t in range(1, horizon + 1):
        if np.all(steps >= 0):
            break
        x = f(x)
        norms.append(np.maximum(*block_norms(x, n)))
        newly = (steps < 0) & (norms[-1] <= R * (1 + 1e-12))
        steps[newly] = t
    return steps, np.stack(norms, axis=1)


# ---------------------------------------------------------------------------
# Pipeline


def _seed(config: PipelineConfig) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env not in (None, "") else int(config.seed)


def build_pipeline(config: PipelineConfig) -> PipelineResult:
    """Construct every stage; verification is separate."""
    seed = _seed(config)
    clock = {}
    t0 = time.perf_counter()
    demo = make_demo(config.demo, **config.demo_params)
    k = demo.k if config.k is None else int(config.k)
    R = float(config.R)
    try:
        e = embed(demo.points, k, config.embed_attempts, seed, config.margin_floor,
                  center=demo.shape.center)
        conj = conjugate_system(demo.sampled, e, config.margin_floor)
    except ValueError as exc:
        raise type(exc)(f"[embedding] {exc}") from exc
    X0 = e(demo.points)
    X1 = pad_dimension(X0)
    n = X1.shape[1]
    assert n == 2 * k + 2 and conj.dim == 2 * k + 1
    body = demo.shape.mapped(e.matrix, e.offset).padded(1)
    R_A = float(np.linalg.norm(X1, axis=1).max())
    clock["embedding"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    thick = min(config.cell_thickness, 0.4 * (R - body.max_norm()))
    cells = neighbourhood_cells(body, [thick * 2.0**-j for j in range(config.J)])
    try:
        h = garay_map(X1, cells, R, config.K_depth, config.J, seed=seed)
    except ValueError as exc:
        raise type(exc)(f"[garay] {exc}") from exc
    clock["garay"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    system1 = SampledSystem(X1[demo.dom], X1[demo.img], name=f"{demo.name}@R^{n}")
    try:
        fhat1 = klee_extend(system1, R)
    except ValueError as exc:
        raise type(exc)(f"[klee] {exc}") from exc
    assert fhat1.fhat.dim == 4 * k + 4
    clock["klee"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    hhat = build_hhat(h, n)
    A = body.padded(n)
    eps = reduce_epsilon(config.epsilon, R, body.max_norm(), config.epsilon_policy)
    m, history = select_m(hhat, R, eps, config.m_cap, A.distance, config.select_samples,
                          seed, config.m_margin)
    f = Composition([Power(hhat, m), fhat1.fhat])
    clock["m_selection"] = time.perf_counter() - t0
    bound = h.entry_step_bound(R, config.m_margin * eps / math.sqrt(2), body.distance)
    selection = {"m": m, "epsilon_requested": config.epsilon, "epsilon_effective": eps,
                 "margin": config.m_margin, "worst_distance": history,
                 "closed_form_bound": max(bound, math.ceil(math.log2(math.sqrt(2) * R / (config.m_margin * eps))))}
    return PipelineResult(config, demo, e, X1, A, h, fhat1, hhat, m, f, eps, selection,
                          timings=clock)


def verify_pipeline(res: PipelineResult) -> VerificationReport:
    cfg = res.config
    seed = _seed(cfg)
    R, n, f, A, eps = cfg.R, res.n, res.f, res.A, res.epsilon
    zeros = np.zeros((len(res.demo.dom), n))

    # conjugacy at anchors: f(e(x), 0) against (e(F(x)), 0)
    lhs = f(np.hstack([res.X1[res.demo.dom], zeros]))
    rhs = np.hstack([res.X1[res.demo.img], zeros])
    conj = float(np.linalg.norm(lhs - rhs, axis=1).max())

    # positive invariance of N(A, eps)
    base = A.sample(cfg.invariance_samples, seed + 100)
    p = base + sample_ball(2 * n, eps, cfg.invariance_samples, seed + 101)
    inv_bad = int(np.sum(~(A.distance(f(p)) < eps)))

    rate = verify_rate(f, R, res.m, res.h.rho, [r * R for r in cfg.rate_radii], cfg.rate_samples,
                       seed + 200)

    att, att_bad, orbit_rows = {}, 0, []
    for i, r in enumerate(cfg.attraction_radii):
        r = r * R
        steps, norms = attraction_steps(f, R, r, cfg.attraction_samples, seed + 300 + 2 * i)
        bound = phi_steps(r, R, res.m, res.h.rho) + cfg.attraction_slack
        att_bad += int(np.sum((steps < 0) | (steps > bound)))
        att[f"{r:g}"] = {"max_steps": int(steps.max()), "bound": bound}
        for s, row in zip(steps, norms):
            orbit_rows.append({"start_radius": r, "steps": int(s), "bound": bound,
                               "norms": ";".join(f"{v:.12g}" for v in row)})

    # truncation f^j(K) for K = samples of B(0,R)^2 plus stored preimages of anchors
    j = cfg.j_max
    checked = _anchors_with_preimages(res.demo, j)
    pts = np.hstack([res.X1[checked], np.zeros((len(checked), n))])
    pre = pts
    for _ in range(j):
        pre = f.inverse(pre)
    K = np.vstack([product_samples(n, R, cfg.truncation_samples, seed + 400), pre])
    for _ in range(j):
        K = f(K)
    trunc = float(np.max(A.distance(K)))
    anchors_in = hausdorff_semidist(pts, K) if len(pts) else 0.0

    grid = product_samples(n, 2 * R, cfg.roundtrip_samples, seed + 500)
    ball = np.vstack([sample_ball(n, 2 * R, cfg.roundtrip_samples, seed + 600), res.X1])
    rt = {"compress": res.fhat1.c.round_trip_error(ball),
          "h": res.h.round_trip_error(ball),
          "hhat": res.hhat.round_trip_error(grid),
          "fhat": res.fhat1.fhat.round_trip_error(grid),
          "f": f.round_trip_error(grid)}
    margins = {"embedding": _finite(res.e.injectivity_margin), "collapse_truncation": res.h.g.truncation_bound
               / res.h.scale, "rho": res.h.rho}
    res.tables = {"orbit_norms": orbit_rows, "rate_grid": rate["rows"]}
    res.report = VerificationReport(conj, cfg.conjugacy_tol, inv_bad, cfg.invariance_samples, att, att_bad,
                                    rate, trunc, bool(trunc < eps), float(anchors_in), len(checked),
                                    cfg.cluster_tol, rt, margins)
    return res.report


def _anchors_with_preimages(demo: Demo, j: int) -> np.ndarray:
    """Anchor indices whose backward orbit of length ``j`` is stored."""
    pre = {int(b): int(a) for a, b in zip(demo.dom, demo.img)}
    keep = []
    for i in range(len(demo.points)):
        x, ok = i, True
        for _ in range(j):
            if x not in pre:
                ok = False
                break
            x = pre[x]
        if ok:
            keep.append(i)
    return np.asarray(keep, dtype=int)


def run_pipeline(config: PipelineConfig | dict) -> PipelineResult:
    if isinstance(config, dict):
        config = PipelineConfig.from_dict(config)
    res = build_pipeline(config)
    t0 = time.perf_counter()
    verify_pipeline(res)
    res.timings["verification"] = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# Reports


def _alpha_decay_steps(h: GarayMap, target: float = 1e-6) -> int:
    return h.alpha_steps(h.scale * h.R, target)


def report_body(res: PipelineResult) -> dict:
    h = res.h
    bk = [modulus_violations(h.g, k, float(h.b[k])) for k in range(res.config.K_depth + 1)]
    return {
        "config": res.config.to_dict(),
        "embedding": {**res.e.to_dict(), "source_dim": res.e.source_dim, "target_dim": res.e.target_dim,
                      "padded_dim": res.n, "anchors": len(res.demo.points)},
        "garay": {"rho": h.rho, "scale": h.scale, "R": h.R, "R_prime": h.R_prime, "J": h.g.J,
                  "truncation_bound": h.g.truncation_bound / h.scale,
                  "b": h.b[:res.config.K_depth + 1].tolist(), "modulus_violations": bk,
                  "alpha_decay_steps": _alpha_decay_steps(h)},
        "klee": {"n": res.fhat1.n, "R": res.fhat1.R, "R_star": res.fhat1.R_star,
                 "dim": res.fhat1.fhat.dim, "anchors": len(res.fhat1.phi.anchors)},
        "m_selection": res.m_selection,
        "verification": res.report.to_dict() if res.report else None,
    }


def result_document(res: PipelineResult) -> dict:
    return {"meta": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
                     "timings": res.timings},
            "body": report_body(res),
            "tables": res.tables}


def write_tables(tables: dict, out: Path) -> None:
    for name, rows in tables.items():
        path = out / f"{name}.csv"
        try:
            with open(path, "w", newline="") as fh:
                if rows:
                    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                    w.writeheader()
                    w.writerows(rows)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc


def emit_report(res: PipelineResult | dict, path) -> Path:
    """Write ``report.json`` plus ``orbit_norms.csv`` and ``rate_grid.csv``."""
    doc = res if isinstance(res, dict) else result_document(res)
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    write_tables(doc.get("tables", {}), out)
    return out / "report.json"
