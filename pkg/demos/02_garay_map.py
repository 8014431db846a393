# A segment in R^3 realized as the global attractor of a homeomorphism.
import numpy as np

from cellular_attractors.garay import garay_map
from cellular_attractors.geometry import sample_ball, sample_sphere
from cellular_attractors.systems import garay_segment_demo

X, cells, R, dist = garay_segment_demo()
print("samples of X:", X.shape, " cells:", len(cells), " outer radius:", cells.outer_radius(0))

h = garay_map(X, cells, R)
print("working scale %.4f, collapse radius R' = %.4f, rho = %.6f" % (h.scale, h.R_prime, h.rho))
print("first moduli b_k:", np.round(h.b[:6], 6))

# Points of X do not move at all.
print("h fixes X exactly:", np.array_equal(h(X), X))

# Far away, spheres go to spheres of radius r - rho.
for r in (1.0, 1.5, 2.0):
    x = sample_sphere(3, r, 200, seed=int(10 * r))
    norms = np.linalg.norm(h(x), axis=1)
    print("r = %.1f  ->  |h(x)| in [%.12f, %.12f], r - rho = %.12f" % (r, norms.min(), norms.max(), r - h.rho))

# Orbits from the outside creep in and then stay close to X.
x = sample_ball(3, 2 * R, 2000, seed=1)
x = x[dist(x) >= 1e-2][:100]
bound = h.entry_step_bound(2 * R, 1e-2, dist)
for n in range(bound):
    x = h(x)
print("after %d steps the farthest orbit point is %.2e from X" % (bound, dist(x).max()))
