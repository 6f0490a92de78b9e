"""Synthetic data generation and Monte Carlo studies.

``generate`` draws regression samples with Gaussian or elliptical
carriers, Gaussian errors, and optional contamination.  The study
runners fit the trimmed estimator over many replications to check the
two empirical directions of the large-sample theory: estimation error
shrinking with n (consistency) and the scaled estimate behaving like a
Gaussian with 1/n variance (normality).  Replications use derived
(seed, index) streams, so results are reproducible and independent of
worker scheduling.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import stats

from .errors import DomainError
from .model import Dataset, TrimSpec
from .numerics import RandomStream, make_stream
from .population import trim_constants
from .solver import SolverConfig, fit

# Study solver default: 50 starts bounds Monte Carlo cost; validated against
# the 500-start default on small pilots (see tests).
STUDY_STARTS = 50


@dataclass(frozen=True)
class Contamination:
    """Row-replacement contamination applied to the last floor(eps*n) rows.

    kinds: ``vertical`` (response set to ``magnitude``), ``leverage``
    (carriers set to ``magnitude``, response left stale so the rows break
    the model), ``pointmass`` (rows set to the fixed point ``z`` =
    (carriers..., response)).
    """

    kind: str
    eps: float = 0.0
    magnitude: float = 0.0
    z: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("none", "vertical", "leverage", "pointmass"):
            raise DomainError(f"unknown contamination kind {self.kind!r}")
        if not 0.0 <= self.eps < 0.5:
            raise DomainError(f"eps must be in [0, 0.5), got {self.eps!r}")
        if self.kind == "pointmass":
            if self.z is None:
                raise DomainError("pointmass contamination needs a point z")
            z = np.asarray(self.z, dtype=np.float64)
            z.setflags(write=False)
            object.__setattr__(self, "z", z)

    @classmethod
    def none(cls) -> "Contamination":
        return cls(kind="none")

    @classmethod
    def vertical(cls, eps: float, magnitude: float) -> "Contamination":
        return cls(kind="vertical", eps=eps, magnitude=magnitude)

    @classmethod
    def leverage(cls, eps: float, magnitude: float) -> "Contamination":
        return cls(kind="leverage", eps=eps, magnitude=magnitude)

    @classmethod
    def pointmass(cls, eps: float, z) -> "Contamination":
        return cls(kind="pointmass", eps=eps, z=z)


@dataclass(frozen=True)
class GenSpec:
    """Sampling specification: y_i = w_i' beta0 + e_i with e ~ N(0, sigma^2)
    independent of the carriers.

    ``design`` is "spherical" (iid standard normal carriers) or
    "elliptical" with ``carrier_cov`` the (p-1)x(p-1) SPD carrier
    covariance.
    """

    n: int
    p: int
    beta0: np.ndarray
    sigma: float = 1.0
    design: str = "spherical"
    carrier_cov: np.ndarray | None = None
    contamination: Contamination | None = None

    def __post_init__(self):
        beta0 = np.asarray(self.beta0, dtype=np.float64)
        if beta0.shape != (self.p,):
            raise DomainError(f"beta0 shape {beta0.shape} != (p,) with p={self.p}")
        beta0.setflags(write=False)
        object.__setattr__(self, "beta0", beta0)
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")
        if self.design not in ("spherical", "elliptical"):
            raise DomainError(f"unknown design {self.design!r}")
        if self.design == "elliptical":
            cov = np.asarray(self.carrier_cov, dtype=np.float64)
            if cov.shape != (self.p - 1, self.p - 1):
                raise DomainError(
                    f"carrier_cov shape {cov.shape} != ({self.p - 1}, {self.p - 1})"
                )
            cov.setflags(write=False)
            object.__setattr__(self, "carrier_cov", cov)


def generate(spec: GenSpec, stream: RandomStream) -> Dataset:
    """Draw one dataset; deterministic given the stream key."""
    n, p = spec.n, spec.p
    x = stream.normal(size=(n, p - 1))
    if spec.design == "elliptical":
        try:
            chol = np.linalg.cholesky(spec.carrier_cov)
        except np.linalg.LinAlgError as exc:
            raise DomainError(f"carrier_cov is not SPD: {exc}") from exc
        x = x @ chol.T
    e = spec.sigma * stream.normal(size=n)
    W = np.hstack([np.ones((n, 1)), x])
    y = W @ spec.beta0 + e
    cont = spec.contamination
    if cont is not None and cont.kind != "none" and cont.eps > 0.0:
        m = int(math.floor(cont.eps * n + 1e-9))
        if m > 0:
            if cont.kind == "vertical":
                y[n - m:] = cont.magnitude
            elif cont.kind == "leverage":
                x[n - m:, :] = cont.magnitude
            else:  # pointmass
                if cont.z.shape != (p,):
                    raise DomainError(
                        f"pointmass z shape {cont.z.shape} != ({p},)"
                    )
                x[n - m:, :] = cont.z[:-1]
                y[n - m:] = cont.z[-1]
    return Dataset.from_xy(x, y)


@dataclass
class StudyResult:
    """Per-replication records plus a deterministic summary.

    ``records`` columns: replication id, sample size, coefficient
    estimates, objective, concentration iterations.  ``summary`` is fully
    JSON-serializable and reproducible byte-for-byte for an identical
    (spec, seed); wall-clock time lives in ``runtime_seconds`` only so it
    never contaminates serialized output.
    """

    rep_ids: np.ndarray
    n_values: np.ndarray
    betas: np.ndarray
    objectives: np.ndarray
    iterations: np.ndarray
    summary: dict
    runtime_seconds: float

    def to_json_text(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2) + "\n"

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json_text())

    def to_csv_text(self, meta: dict | None = None) -> str:
        p = self.betas.shape[1]
        lines = []
        if meta is not None:
            lines.append("# " + json.dumps(meta, sort_keys=True))
        header = ["rep", "n"] + [f"beta_{j}" for j in range(p)] + [
            "objective", "iterations",
        ]
        lines.append(",".join(header))
        for i in range(self.rep_ids.size):
            row = [str(int(self.rep_ids[i])), str(int(self.n_values[i]))]
            row += [repr(float(v)) for v in self.betas[i]]
            row += [repr(float(self.objectives[i])), str(int(self.iterations[i]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path, meta: dict | None = None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text(meta))


def _replicate(task):
    """One replication: generate, fit, report.  Module-level so process
    pools can pickle it; deterministic given the stream key in the task."""
    rep_id, spec, alpha, config, seed, stream_id = task
    stream = make_stream(seed, stream_id)
    data = generate(spec, stream)
    solver_seed = int(stream.integers(0, 2**63))
    trim = TrimSpec.for_size(spec.n, alpha)
    result = fit(data, trim, replace(config, seed=solver_seed))
    return rep_id, result.beta, result.objective_value, result.iterations


def _run_reps(tasks, n_workers: int):
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_replicate, tasks, chunksize=8))
    else:
        results = [_replicate(t) for t in tasks]
    return results


def _study_config(config: SolverConfig | None) -> SolverConfig:
    return SolverConfig(n_starts=STUDY_STARTS) if config is None else config


def run_consistency_study(
    spec: GenSpec,
    n_grid,
    reps: int,
    alpha: float,
    config: SolverConfig | None = None,
    stream: RandomStream | None = None,
    n_workers: int = 1,
) -> StudyResult:
    """Median estimation error across an increasing grid of sample sizes.

    The summary reports median ||beta_hat - beta0|| per grid point and
    whether the sequence strictly decreases.
    """
    n_grid = [int(v) for v in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise DomainError("n_grid must be strictly increasing")
    if reps < 1:
        raise DomainError("reps must be positive")
    config = _study_config(config)
    if stream is None:
        stream = make_stream(0, 0)
    start = time.perf_counter()

    tasks = []
    rep_id = 0
    for n in n_grid:
        spec_n = replace(spec, n=n)
        for _ in range(reps):
            child = stream.child(rep_id)
            tasks.append((rep_id, spec_n, alpha, config, child.seed, child.stream_id))
            rep_id += 1
    results = _run_reps(tasks, n_workers)
    results.sort(key=lambda r: r[0])

    total = len(tasks)
    p = spec.p
    betas = np.vstack([r[1] for r in results])
    objectives = np.array([r[2] for r in results])
    iterations = np.array([r[3] for r in results], dtype=np.intp)
    rep_ids = np.arange(total, dtype=np.intp)
    n_values = np.repeat(n_grid, reps)

    errors = np.linalg.norm(betas - spec.beta0[None, :], axis=1)
    medians = [float(np.median(errors[n_values == n])) for n in n_grid]
    summary = {
        "study": "consistency",
        "alpha": alpha,
        "n_grid": n_grid,
        "reps": reps,
        "beta0": [float(v) for v in spec.beta0],
        "sigma": spec.sigma,
        "design": spec.design,
        "median_error": medians,
        "monotone_decreasing": bool(
            all(b < a for a, b in zip(medians, medians[1:]))
        ),
        "seed": [int(stream.seed), int(stream.stream_id)],
        "solver": asdict(config),
    }
    return StudyResult(
        rep_ids=rep_ids,
        n_values=np.asarray(n_values, dtype=np.intp),
        betas=betas,
        objectives=objectives,
        iterations=iterations,
        summary=summary,
        runtime_seconds=time.perf_counter() - start,
    )


def run_normality_study(
    spec: GenSpec,
    n: int,
    reps: int,
    alpha: float,
    config: SolverConfig | None = None,
    stream: RandomStream | None = None,
    n_workers: int = 1,
    rate_check_n: int | None = None,
) -> StudyResult:
    """Sampling-distribution diagnostics for sqrt(n) * (beta_hat - beta0).

    Reports the empirical mean and covariance of the scaled estimates,
    per-coordinate skewness and Anderson-Darling normality statistics
    (1% critical value from the estimated-parameter tables), and the
    theoretical per-coordinate variance ``cov_factor`` side by side with
    the empirical covariance; the two are reported, not asserted equal.
    With ``rate_check_n`` an auxiliary batch at that sample size is run
    and the diagonal ratio of the two scaled covariances is added (near 1
    under the 1/n variance rate).
    """
    if reps < 200:
        raise DomainError("normality study needs reps >= 200")
    config = _study_config(config)
    if stream is None:
        stream = make_stream(0, 0)
    start = time.perf_counter()

    sizes = [int(n)] + ([int(rate_check_n)] if rate_check_n else [])
    tasks = []
    rep_id = 0
    for size in sizes:
        spec_n = replace(spec, n=size)
        for _ in range(reps):
            child = stream.child(rep_id)
            tasks.append((rep_id, spec_n, alpha, config, child.seed, child.stream_id))
            rep_id += 1
    results = _run_reps(tasks, n_workers)
    results.sort(key=lambda r: r[0])

    betas = np.vstack([r[1] for r in results])
    objectives = np.array([r[2] for r in results])
    iterations = np.array([r[3] for r in results], dtype=np.intp)
    rep_ids = np.arange(len(tasks), dtype=np.intp)
    n_values = np.repeat(sizes, reps)

    def scaled_cov(size):
        rows = betas[n_values == size]
        z = np.sqrt(size) * (rows - spec.beta0[None, :])
        return z, np.cov(z, rowvar=False, ddof=1)

    z_main, cov_main = scaled_cov(n)
    ad_stats, ad_crit = _anderson_darling(z_main)
    offdiag = cov_main - np.diag(np.diag(cov_main))
    summary = {
        "study": "normality",
        "alpha": alpha,
        "n": int(n),
        "reps": reps,
        "beta0": [float(v) for v in spec.beta0],
        "sigma": spec.sigma,
        "design": spec.design,
        "mean_scaled": [float(v) for v in z_main.mean(axis=0)],
        "covariance_scaled": [[float(v) for v in row] for row in cov_main],
        "offdiag_max_abs": float(np.max(np.abs(offdiag))) if spec.p > 1 else 0.0,
        "skewness": [float(v) for v in stats.skew(z_main, axis=0)],
        "anderson_darling": ad_stats,
        "ad_critical_1pct": ad_crit,
        "cov_factor": trim_constants(alpha, spec.sigma).cov_factor,
        "seed": [int(stream.seed), int(stream.stream_id)],
        "solver": asdict(config),
    }
    if rate_check_n:
        _, cov_aux = scaled_cov(rate_check_n)
        summary["rate_check_n"] = int(rate_check_n)
        summary["rate_ratio_diag"] = [
            float(v) for v in np.diag(cov_main) / np.diag(cov_aux)
        ]
    return StudyResult(
        rep_ids=rep_ids,
        n_values=np.asarray(n_values, dtype=np.intp),
        betas=betas,
        objectives=objectives,
        iterations=iterations,
        summary=summary,
        runtime_seconds=time.perf_counter() - start,
    )


def _anderson_darling(z: np.ndarray) -> tuple[list, float]:
    """Per-coordinate Anderson-Darling statistic for normality with
    estimated parameters, plus the published 1% critical value."""
    stats_out = []
    crit = None
    for j in range(z.shape[1]):
        res = stats.anderson(z[:, j], dist="norm")
        stats_out.append(float(res.statistic))
        levels = np.asarray(res.significance_level)
        crit = float(res.critical_values[int(np.argmin(np.abs(levels - 1.0)))])
    return stats_out, crit
