"""Shared builders for randomized test instances."""

import numpy as np

from trimreg import Dataset, TrimSpec


def random_dataset(rng, n=20, p=2, sigma=1.0, outlier_frac=0.0):
    """Gaussian-carrier dataset with optional gross vertical outliers."""
    x = rng.standard_normal((n, p - 1))
    beta = rng.standard_normal(p)
    W = np.hstack([np.ones((n, 1)), x])
    y = W @ beta + sigma * rng.standard_normal(n)
    k = int(outlier_frac * n)
    if k:
        y[-k:] = 50.0 + 10.0 * rng.standard_normal(k)
    return Dataset(y=y, W=W), beta


def padded_line_dataset(xs, ys, slope=2.0, intercept=1.0, total=7):
    """Dataset whose first rows are the given points, padded with extra
    points on the line intercept + slope*x so n > 2p holds."""
    xs = list(xs)
    ys = list(ys)
    extra = 0
    while len(xs) < total:
        xv = 10.0 + extra
        xs.append(xv)
        ys.append(intercept + slope * xv)
        extra += 1
    return Dataset.from_xy(np.array(xs, float), np.array(ys, float))


def trim_for(data, alpha=0.5):
    return TrimSpec.for_size(data.n, alpha)
