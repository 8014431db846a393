"""Acceptance criteria, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np

from cellular_attractors.cells import round_cells
from cellular_attractors.dynamics import SampledSystem, certify_attractor, contraction_witness, omega_limit
from cellular_attractors.garay import brown_collapse, garay_map
from cellular_attractors.geometry import hausdorff_semidist, rng, sample_ball, sample_sphere
from cellular_attractors.klee import build_compress
from cellular_attractors.pipeline import (DEMOS, PipelineConfig, phi_rate, phi_steps, phi_steps_analytic,
                                          product_samples, run_pipeline, verify_rate)
from cellular_attractors.systems import GARAY_DEMOS, linear_contraction, linear_semiflow

TOL_ROUND_TRIP = 1e-9
TOL_BALL = 1e-9
TOL_SPHERE = 1e-9
TOL_CONJUGACY = 1e-6
TOL_WITNESS = 1e-12
PIPELINE_SECONDS = 120.0

_PIPELINES = {}


def pipeline(name):
    if name not in _PIPELINES:
        t0 = time.perf_counter()
        res = run_pipeline(PipelineConfig(demo=name))
        _PIPELINES[name] = (res, time.perf_counter() - t0)
    return _PIPELINES[name]


def verdict(number, title, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{number} {title}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def brute_semidist(A, B):
    worst = 0.0
    for a in A:
        best = math.inf
        for b in B:
            s = 0.0
            for i in range(len(a)):
                d = float(a[i]) - float(b[i])
                s += d * d
            best = min(best, math.sqrt(s))
        worst = max(worst, best)
    return worst


def test_ac1_round_trip(capsys):
    errors = {}
    for name in sorted(DEMOS):
        res, _ = pipeline(name)
        n = res.n
        ball = sample_ball(n, 2.0, 1000, 11)
        grid = product_samples(n, 2.0, 1000, 12)
        errors[f"{name}.compress"] = res.fhat1.c.round_trip_error(ball)
        errors[f"{name}.h"] = res.h.round_trip_error(ball)
        errors[f"{name}.hhat"] = res.hhat.round_trip_error(grid)
        errors[f"{name}.fhat"] = res.fhat1.fhat.round_trip_error(grid)
        errors[f"{name}.f"] = res.f.round_trip_error(grid)
    worst = max(errors, key=errors.get)
    verdict(1, "round-trip inversion", errors[worst] <= TOL_ROUND_TRIP,
            f"max error {errors[worst]:.3g} ({worst}) over {len(errors)} maps x 1000 points", capsys)


def test_ac2_compress_ball_property(capsys):
    R, R_star = 1.0, 0.75
    c = build_compress(R_star, R, 4)
    worst = 0.0
    for r in (2 * R, 3 * R, 5 * R):
        p = sample_sphere(4, r, 500, int(r))
        worst = max(worst, float(np.max(np.linalg.norm(c(p), axis=1) - r / 2)))
    core = sample_ball(4, R_star, 500, 9)
    exact = bool(np.array_equal(c(core), core))
    verdict(2, "compress halves large balls", worst <= TOL_BALL and exact,
            f"max |c(p)| - r/2 = {worst:.3g}, identity on B(0,R*): {exact}", capsys)


def test_ac3_containment_chain(capsys):
    worst, count = -np.inf, 0
    for name in sorted(DEMOS):
        res, _ = pipeline(name)
        ext, n, R = res.fhat1, res.n, res.config.R
        for r in (R, 2 * R):
            p = product_samples(n, r, 500, int(10 * r))
            for m, (ax, ay) in ((ext.f1, (r, 2 * r)), (ext.g, (2 * r, 2 * r)), (ext.fhat, (r, r))):
                bx, by = ext.blocks(m(p))
                worst = max(worst, float(bx.max() - ax), float(by.max() - ay))
                count += len(p)
    verdict(3, "Klee block containment chain", worst <= TOL_BALL,
            f"max excess over block bounds {worst:.3g} on {count} evaluations", capsys)


def test_ac4_garay_contraction_and_attraction(capsys):
    eps = 1e-2
    sphere_err, entered, total, left, bound_used = 0.0, 0, 0, 0, {}
    for name in sorted(GARAY_DEMOS):
        X, cells, R, dist = GARAY_DEMOS[name]()
        h = garay_map(X, cells, R)
        dim = X.shape[1]
        for r in (1.01 * R, 1.5 * R, 2 * R):
            x = sample_sphere(dim, r, 200, int(100 * r))
            sphere_err = max(sphere_err, float(np.abs(np.linalg.norm(h(x), axis=1) - (r - h.b[0] / h.scale)).max()))
        x = sample_ball(dim, 2 * R, 1000, 21)
        x = x[dist(x) >= eps][:100]
        bound = h.entry_step_bound(2 * R, eps, dist)
        bound_used[name] = bound
        step = np.full(len(x), -1)
        for t in range(1, bound + 50):
            x = h(x)
            near = dist(x) < eps
            left += int(np.sum((step >= 0) & ~near))
            step[(step < 0) & near] = t
        entered += int(np.sum((step >= 0) & (step <= bound)))
        total += len(x)
    ok = sphere_err <= TOL_SPHERE and entered == total == 200 and left == 0
    verdict(4, "Garay sphere contraction and attraction", ok,
            f"sphere error {sphere_err:.3g}; {entered}/{total} orbits entered N(X,1e-2) within "
            f"bounds {bound_used}; exits after entry {left}", capsys)


def test_ac5_pipeline(capsys):
    details, ok = [], True
    for name in sorted(DEMOS):
        res, seconds = pipeline(name)
        rep = res.report
        good = (rep.conjugacy_error <= TOL_CONJUGACY and rep.positive_invariance_violations == 0
                and rep.invariance_samples >= 1000 and rep.truncation_inside
                and rep.truncation_semidist < res.epsilon and seconds <= PIPELINE_SECONDS)
        ok &= good
        details.append(f"{name}: conj={rep.conjugacy_error:.2g} inv={rep.positive_invariance_violations}"
                       f" trunc={rep.truncation_semidist:.2g}<{res.epsilon:g} {seconds:.1f}s")
    verdict(5, "pipeline A in A_f in N(A,eps)", ok, "; ".join(details), capsys)


def test_ac6_rate(capsys):
    details, ok = [], True
    for name in sorted(DEMOS):
        res, _ = pipeline(name)
        R, m, rho = res.config.R, res.m, res.h.rho
        rate = verify_rate(res.f, R, m, rho, [R, 1.5 * R, 2 * R, 3 * R, 4 * R], 200, seed=77)
        n = phi_steps(4 * R, R, m, rho)
        n_bound = phi_steps_analytic(4 * R, R, m, rho)
        r = 4 * R
        for _ in range(n_bound):
            r = float(phi_rate(r, R, m, rho))
        good = rate["violations"] == 0 and n <= n_bound and r == R
        ok &= good
        details.append(f"{name}: violations={rate['violations']} n={n}<={n_bound}")
    verdict(6, "contraction rate phi", ok, "; ".join(details), capsys)


def test_ac7_halving_oracles(capsys):
    F = linear_contraction(2)
    K = sample_ball(2, 1.0, 256, 31)
    s = SampledSystem.from_map(F, K)
    A = certify_attractor(s, K, 30)
    max_norm = float(np.linalg.norm(A, axis=1).max())
    omega = omega_limit(s, K, burn_in=200, window=50, cluster_tol=1e-3)
    omega_ok = len(omega) == 1 and float(np.linalg.norm(omega[0])) <= 1e-3
    g = rng(32)
    exact = 0
    for _ in range(20):
        a = g.standard_normal((int(g.integers(1, 15)), 3))
        b = g.standard_normal((int(g.integers(1, 15)), 3))
        exact += hausdorff_semidist(a, b) == brute_semidist(a, b)
    ok = max_norm <= 2.0**-30 * (1 + 1e-12) and omega_ok and exact == 20
    verdict(7, "attractor of x/2 and semidistance oracle", ok,
            f"max norm {max_norm:.4g} (bound {2.0**-30:.4g}); omega {omega.tolist()}; "
            f"{exact}/20 exact semidistance matches", capsys)


def test_ac8_witness(capsys):
    A = sample_ball(2, 0.5, 30, 41)
    w = contraction_witness(linear_semiflow, A, 0, U_radius=0.05)
    g = rng(42)
    p = A[g.integers(0, len(A), 100)] + sample_ball(2, 0.05, 100, 43)
    t = g.uniform(0, 1, 100)
    start = float(np.abs(w(p, np.zeros(100)) - p).max())
    end = float(np.abs(w(p, np.ones(100)) - linear_semiflow(np.full(100, w.T), np.tile(w.q, (100, 1)))).max())
    seam = float(np.abs(w.first_branch(p, 0.5) - w.second_branch(p, 0.5)).max())
    body = float(np.abs(w(p, t) - np.where((t <= 0.5)[:, None], w.first_branch(p, t), w.second_branch(p, t))).max())
    ok = max(start, end, seam, body) <= TOL_WITNESS
    verdict(8, "contraction witness endpoints and seam", ok,
            f"T={w.T:g}; start {start:.2g}, end {end:.2g}, seam {seam:.2g} on 100 pairs", capsys)


def test_ac9_collapse_truncation(capsys):
    details, bad = [], 0
    for J in (3, 10, 20):
        cells = round_cells([0.9 * 0.8**j for j in range(J)], 3)
        g = brown_collapse(cells, 1.0, J)
        inner = sample_ball(3, 0.9 * 0.8 ** (J - 1), 2000, J)
        inner = np.vstack([inner, sample_sphere(3, 0.9 * 0.8 ** (J - 1), 500, J + 1)])
        norms = np.linalg.norm(g(inner), axis=1)
        bad += int(np.sum(norms > 1.0 / (J + 1)))
        details.append(f"J={J}: max {norms.max():.12g} < {1.0 / (J + 1):.12g}")
    verdict(9, "collapse truncation bound", bad == 0, f"violations {bad}; " + "; ".join(details), capsys)


if __name__ == "__main__":
    failures = 0
    for fn in (test_ac1_round_trip, test_ac2_compress_ball_property, test_ac3_containment_chain,
               test_ac4_garay_contraction_and_attraction, test_ac5_pipeline, test_ac6_rate,
               test_ac7_halving_oracles, test_ac8_witness, test_ac9_collapse_truncation):
        try:
            fn(None)
        except AssertionError:
            failures += 1
    raise SystemExit(1 if failures else 0)
