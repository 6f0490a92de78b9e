"""Confidence regions for the regression coefficients.

Two constructions:

* ``ci_normal_ball`` — a Euclidean ball around the fitted coefficients
  sized from the Gaussian limit law.  The "corrected" mode (default)
  uses radius sqrt(cov_factor/n * chi2_quantile(p, 1-gamma)), the ball
  implied by the chi-square law of the scaled squared error; the
  "paper-literal" mode preserves the alternative printed convention
  sqrt(cov_factor/n) * chi2_quantile(p, gamma).  Both are kept because
  the two disagree and coverage should be measured for each.
* ``ci_depth_region`` — distribution-free: bootstrap the fit m times,
  rank the coefficient cloud by (approximate) halfspace depth, trim the
  floor(gamma*m) least deep points, and keep the rest.  Membership of an
  arbitrary point is "its depth against the cloud reaches the smallest
  retained depth", evaluated with the same direction set used to rank
  the cloud.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from .errors import AllStartsDegenerate, DomainError, ResampleExhausted
from .model import Dataset, TrimSpec
from .numerics import RandomStream, chi2_quantile, make_stream
from .population import AsymptoticConstants
from .solver import LtsFit, SolverConfig, fit

logger = logging.getLogger(__name__)

# Directions per coefficient dimension for approximate halfspace depth.
DIRECTIONS_PER_DIM = 1000

# Consecutive degenerate redraws tolerated per bootstrap resample slot.
MAX_REDRAWS = 10


@dataclass(frozen=True)
class NormalBallRegion:
    """Euclidean ball membership region; boundary points are members."""

    center: np.ndarray
    radius: float
    gamma: float
    mode: str

    def contains(self, beta) -> bool:
        beta = np.asarray(beta, dtype=np.float64)
        return bool(np.linalg.norm(beta - self.center) <= self.radius)

    def to_json_dict(self) -> dict:
        return {
            "type": "normal_ball",
            "center": [float(v) for v in self.center],
            "radius": float(self.radius),
            "gamma": float(self.gamma),
            "mode": self.mode,
        }


@dataclass(frozen=True)
class DepthRegion:
    """Bootstrap coefficient cloud trimmed by halfspace depth.

    ``retained`` indexes the cloud rows kept after trimming the
    floor(gamma*m) least deep points (depth ties broken toward trimming
    the smaller index).  ``threshold`` is the smallest retained depth;
    membership of any point is depth >= threshold under the stored
    direction set, which is regenerated from ``direction_seed`` so
    queries are deterministic and consistent with the cloud ranking.
    """

    cloud: np.ndarray
    depths: np.ndarray
    threshold: float
    retained: np.ndarray
    gamma: float
    n_directions: int
    direction_seed: tuple[int, int]

    def contains(self, beta) -> bool:
        stream = make_stream(*self.direction_seed)
        d = depth(beta, self.cloud, self.n_directions, stream)
        return bool(d >= self.threshold)

    def to_json_dict(self, with_hull: bool = True) -> dict:
        out = {
            "type": "depth_region",
            "gamma": float(self.gamma),
            "threshold": float(self.threshold),
            "n_directions": int(self.n_directions),
            "direction_seed": [int(v) for v in self.direction_seed],
            "cloud": [[float(v) for v in row] for row in self.cloud],
            "depths": [float(v) for v in self.depths],
            "retained": [int(v) for v in self.retained],
        }
        if with_hull:
            out["hull"] = self._hull_vertices()
        return out

    def _hull_vertices(self):
        """Convex hull of the retained points, for plotting; only emitted
        in low dimension (p <= 3)."""
        pts = self.cloud[self.retained]
        p = pts.shape[1]
        if p > 3:
            return None
        if p == 1:
            return [[float(pts.min())], [float(pts.max())]]
        try:
            from scipy.spatial import ConvexHull, QhullError

            hull = ConvexHull(pts)
        except QhullError:
            return None
        return [[float(v) for v in pts[i]] for i in hull.vertices]


def ci_normal_ball(
    fit_result: LtsFit,
    constants: AsymptoticConstants,
    n: int,
    gamma: float,
    mode: str = "corrected",
) -> NormalBallRegion:
    """Asymptotic-normality confidence ball at miscoverage gamma."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must be in (0, 1), got {gamma!r}")
    if n < 1:
        raise DomainError("n must be positive")
    p = fit_result.beta.size
    per_n = constants.cov_factor / n
    if mode == "corrected":
        radius = float(np.sqrt(per_n * chi2_quantile(p, 1.0 - gamma)))
    elif mode == "paper-literal":
        radius = float(np.sqrt(per_n) * chi2_quantile(p, gamma))
    else:
        raise DomainError(f"mode must be 'corrected' or 'paper-literal', got {mode!r}")
    return NormalBallRegion(
        center=fit_result.beta, radius=radius, gamma=gamma, mode=mode
    )


def bootstrap_fits(
    data: Dataset,
    trim: TrimSpec,
    m: int,
    config: SolverConfig | None = None,
    stream: RandomStream | None = None,
) -> np.ndarray:
    """Coefficients from m trimmed fits on with-replacement resamples.

    Each resample draws n row indices from its own derived stream, so the
    result is deterministic given the parent stream key.  Degenerate
    resamples (every start rank-deficient) are redrawn, up to MAX_REDRAWS
    consecutive failures per slot.
    """
    if m < 1:
        raise DomainError("m must be positive")
    if config is None:
        config = SolverConfig(n_starts=50)
    if stream is None:
        stream = make_stream(0, 0)
    n = data.n
    out = np.empty((m, data.p))
    redraws = 0
    for j in range(m):
        child = stream.child(j)
        for attempt in range(MAX_REDRAWS + 1):
            idx = child.integers(0, n, size=n)
            resample = Dataset(y=data.y[idx], W=data.W[idx])
            solver_seed = int(child.integers(0, 2**63))
            try:
                out[j] = fit(resample, trim, replace(config, seed=solver_seed)).beta
                break
            except AllStartsDegenerate as exc:
                redraws += 1
                logger.debug("resample %d attempt %d degenerate: %s", j, attempt, exc)
        else:
            raise ResampleExhausted(
                f"resample {j}: {MAX_REDRAWS} consecutive degenerate redraws"
            )
    if redraws:
        logger.info("bootstrap_fits redrew %d degenerate resamples", redraws)
    return out


def _unit_directions(stream: RandomStream, count: int, p: int) -> np.ndarray:
    g = stream.normal(size=(count, p))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    return g / norms[:, None]


def _min_side_depth(projections: np.ndarray, point_proj: np.ndarray, m: int) -> float:
    """min over directions of min(#cloud <= point, #cloud >= point) / m."""
    ge = (projections >= point_proj[None, :]).sum(axis=0)
    le = (projections <= point_proj[None, :]).sum(axis=0)
    return float(np.minimum(ge, le).min() / m)


def _project_with_point(cloud: np.ndarray, point: np.ndarray, directions: np.ndarray):
    """Project cloud and query point through one stacked product so a query
    equal to a cloud row lands on bit-identical projections (separate
    matmul paths can differ in the last ulp and break self-counting)."""
    stacked = np.vstack([cloud, point[None, :]]) @ directions.T
    return stacked[:-1], stacked[-1]


def depth(
    point,
    cloud,
    n_directions: int | None = None,
    stream: RandomStream | None = None,
) -> float:
    """Approximate halfspace depth of ``point`` within ``cloud``.

    For each random direction, the point's depth is bounded by the smaller
    of the two closed half-line counts of cloud projections; the depth is
    the minimum over directions, divided by the cloud size.  One-
    dimensional clouds use the exact rank formula min(#<=, #>=)/m.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    m, p = cloud.shape
    if m == 0:
        raise DomainError("cloud must be nonempty")
    point = np.atleast_1d(np.asarray(point, dtype=np.float64))
    if point.shape != (p,):
        raise DomainError(f"point shape {point.shape} != ({p},)")
    if p == 1:
        v = float(point[0])
        return float(min((cloud[:, 0] <= v).sum(), (cloud[:, 0] >= v).sum()) / m)
    d = n_directions if n_directions is not None else DIRECTIONS_PER_DIM * p
    if d < 1:
        raise DomainError("n_directions must be positive")
    if stream is None:
        stream = make_stream(0, 0)
    directions = _unit_directions(stream, d, p)
    proj_cloud, proj_point = _project_with_point(cloud, point, directions)
    return _min_side_depth(proj_cloud, proj_point, m)


def ci_depth_region(
    cloud,
    gamma: float,
    n_directions: int | None = None,
    stream: RandomStream | None = None,
) -> DepthRegion:
    """Depth-trimmed confidence region from a bootstrap coefficient cloud.

    Depths of all cloud points are computed against a single shared
    direction set; the floor(gamma*m) least deep points are trimmed (ties
    by index) and the smallest retained depth becomes the membership
    threshold.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    m, p = cloud.shape
    if m < 10:
        raise DomainError(f"need at least 10 cloud points, got {m}")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must be in (0, 1), got {gamma!r}")
    d = n_directions if n_directions is not None else DIRECTIONS_PER_DIM * p
    if stream is None:
        stream = make_stream(0, 0)
    # Directions come from a fresh child so membership queries can
    # regenerate them from the stored key alone.
    dir_stream = stream.child(0)
    if p == 1:
        proj = cloud
    else:
        proj = cloud @ _unit_directions(dir_stream, d, p).T
    le = rankdata(proj, method="max", axis=0)
    ge = m - rankdata(proj, method="min", axis=0) + 1
    depths = np.minimum(le, ge).min(axis=1) / m

    k = int(np.floor(gamma * m))
    order = np.lexsort((np.arange(m), depths))
    retained = np.sort(order[k:])
    threshold = float(depths[retained].min())
    return DepthRegion(
        cloud=cloud,
        depths=depths,
        threshold=threshold,
        retained=retained,
        gamma=gamma,
        n_directions=d,
        direction_seed=(dir_stream.seed, dir_stream.stream_id),
    )
