# Lifting a sampled rotation of a circle in R^2 to a homeomorphism of R^4.
import numpy as np

from cellular_attractors.dynamics import SampledSystem
from cellular_attractors.geometry import sample_ball, sample_sphere
from cellular_attractors.klee import klee_extend

angles = 2 * np.pi * np.arange(24) / 24
circle = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)])
F = SampledSystem(circle, np.roll(circle, -5, axis=0), name="rotation")

ext = klee_extend(F, R=1.0)
print("R* = %.3f, compress profile %s" % (ext.R_star, ext.c.profile))

# On X x {0} the lift is (f(x), 0), exactly at every stored sample.
z = np.zeros_like(circle)
lifted = ext(np.hstack([circle, z]))
print("anchor conjugation error:", np.abs(lifted - np.hstack([F.image, z])).max())

# Balls B(0,r) x B(0,r) with r >= R are mapped into themselves.
for r in (1.0, 2.0, 4.0):
    p = np.hstack([sample_sphere(2, r, 500, seed=1), sample_sphere(2, r, 500, seed=2)])
    bx, by = ext.blocks(ext(p))
    print("r = %.0f: block norms at most %.4f and %.4f" % (r, bx.max(), by.max()))

# The inverse is assembled from the component inverses, not interpolated.
p = np.hstack([sample_ball(2, 2.0, 1000, 3), sample_ball(2, 2.0, 1000, 4)])
print("round trip error:", ext.fhat.round_trip_error(p))
