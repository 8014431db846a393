# Radial profiles, composable homeomorphisms and the semidistance.
import numpy as np

from cellular_attractors.geometry import RadialProfile, hausdorff_semidist, sample_ball
from cellular_attractors.maps import AffineMap, RadialMap

# A profile is a strictly increasing piecewise-linear map of [0, inf).
pull = RadialProfile([(0.5, 0.75), (1.0, 1.0), (2.0, 1.5)], tail_slope=0.5)
r = np.array([0.0, 0.25, 1.0, 3.0, 10.0])
print("pull(r)        ", pull(r))
print("pull^-1(pull r)", pull.inverse()(pull(r)))

# Radial maps and rotations compose; the inverse is the reversed chain.
m = AffineMap.rotation2d(1.0) @ RadialMap(pull, 2)
p = sample_ball(2, 3.0, 1000, seed=0)
print("round trip error", m.round_trip_error(p))

# Iterating m drives every norm to 1: the unit circle attracts.
x = p
for _ in range(60):
    x = m(x)
norms = np.linalg.norm(x, axis=1)
print("norms after 60 steps: min %.12f max %.12f" % (norms.min(), norms.max()))

# The semidistance is asymmetric: sup over the first set of the gap to the second.
circle = np.column_stack([np.cos(np.linspace(0, 2 * np.pi, 400)), np.sin(np.linspace(0, 2 * np.pi, 400))])
print("dist(x_60, circle) =", hausdorff_semidist(x, circle))
print("dist(circle, x_60) =", hausdorff_semidist(circle, x))
