"""Two confidence regions for the regression coefficients.

The normal ball comes from the Gaussian limit law and needs the error
scale sigma; the depth region needs no distributional input: it
bootstraps the fit, ranks the coefficient cloud by halfspace depth, and
trims the least deep 100*gamma percent.
"""

import numpy as np

from trimreg import (
    Dataset,
    SolverConfig,
    TrimSpec,
    bootstrap_fits,
    ci_depth_region,
    ci_normal_ball,
    fit,
    make_stream,
    trim_constants,
)

stream = make_stream(31)
n, beta_true, sigma = 150, np.array([1.0, 2.0]), 1.0
x = stream.normal(size=(n, 1))
y = 1.0 + 2.0 * x[:, 0] + sigma * stream.normal(size=n)
y[-15:] = 25.0  # 10% vertical outliers
data = Dataset.from_xy(x, y)
trim = TrimSpec.for_size(n, 0.75)

result = fit(data, trim, SolverConfig(n_starts=200, seed=5))
print(f"fit: {np.round(result.beta, 4)} (truth {beta_true})")

constants = trim_constants(0.75, sigma)
for mode in ("corrected", "paper-literal"):
    ball = ci_normal_ball(result, constants, n, gamma=0.05, mode=mode)
    print(f"\nnormal ball [{mode}]: radius = {ball.radius:.4f}, "
          f"truth member: {ball.contains(beta_true)}")

cloud = bootstrap_fits(data, trim, m=300,
                       config=SolverConfig(n_starts=50, seed=0),
                       stream=stream.child(0))
region = ci_depth_region(cloud, gamma=0.05, stream=stream.child(1))
print(f"\ndepth region: {region.retained.size} of {cloud.shape[0]} bootstrap "
      f"fits retained, depth threshold = {region.threshold:.4f}")
print(f"  truth member: {region.contains(beta_true)}")
print(f"  cloud spread (per coordinate sd): {np.round(cloud.std(axis=0), 4)}")
hull = region.to_json_dict()["hull"]
print(f"  convex hull of retained points: {len(hull)} vertices (p = 2)")
