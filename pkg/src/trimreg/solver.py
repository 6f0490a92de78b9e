"""Trimmed least-squares solvers.

Two routes to the minimizer of the trimmed objective:

* ``fit`` — multi-start concentration.  Each start is an exact fit through
  p random rows; a concentration step replaces beta by the least-squares
  fit on the h rows it currently retains, which never increases the
  objective, so every start descends to a fixed point in finitely many
  steps.  All starts are iterated in lockstep with batched linear algebra.
* ``exact_enumerate`` — the finite oracle.  The global minimum is attained
  on one of the C(n, h) retention patterns, so fitting every h-subset and
  scoring the full objective is exhaustive (and only viable at small n).

``check_stationarity`` measures the trimmed normal-equation residual that
must vanish at any interior minimizer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AllStartsDegenerate, DomainError, SingularMatrix, TooManySubsets
from .model import Dataset, HSubset, TrimSpec, _check_trim, h_subset, objective, residuals
from .numerics import make_stream, spd_solve

# Floor added to relative objective-change tests so exact zeros converge.
_TINY = 1e-300

# Memory bound (in gathered floats) for batched subset least squares.
_CHUNK_FLOATS = 2 * 10**7


@dataclass(frozen=True)
class LtsFit:
    """Result of a trimmed fit.

    ``objective_value`` and ``subset`` are recomputed from ``beta`` at
    construction sites, so they always agree with the model module.
    ``start_index`` is the provenance of the winning start (-1 for
    enumeration).
    """

    beta: np.ndarray
    objective_value: float
    subset: HSubset
    iterations: int
    converged: bool
    start_index: int


@dataclass(frozen=True)
class SolverConfig:
    """Multi-start concentration settings.

    Convergence of a start means the relative objective change fell below
    ``tol_objective`` or two consecutive retention sets were identical
    (the exact fixed-point condition).  Rank-deficient starts are
    discarded, not repaired.
    """

    n_starts: int = 500
    max_csteps: int = 100
    tol_objective: float = 1e-12
    tol_stationarity: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1 or self.max_csteps < 1:
            raise DomainError("n_starts and max_csteps must be positive")
        if self.tol_objective <= 0 or self.tol_stationarity <= 0:
            raise DomainError("tolerances must be positive")


def ls_fit_subset(data: Dataset, subset) -> np.ndarray:
    """Least-squares coefficients on the given rows.

    Solves (sum w_k w_k') beta = sum y_k w_k over the subset through the
    symmetric solver; raises SingularMatrix when the subset rows are
    rank-deficient.
    """
    idx = np.asarray(subset, dtype=np.intp)
    Ws = data.W[idx]
    ys = data.y[idx]
    return spd_solve(Ws.T @ Ws, Ws.T @ ys)


def c_step(data: Dataset, beta, trim: TrimSpec) -> tuple[np.ndarray, float]:
    """One concentration step: refit least squares on the rows currently
    retained at ``beta``.

    Returns (beta_next, objective_next); the objective never increases,
    with equality exactly at a fixed point.
    """
    subset = h_subset(data, beta, trim)
    beta_next = ls_fit_subset(data, subset.indices)
    return beta_next, objective(data, beta_next, trim)


def check_stationarity(data: Dataset, fit, trim: TrimSpec) -> float:
    """Norm of the trimmed normal-equation residual ||sum r_i w_i over the
    retained rows|| at the fit's beta (or at a raw coefficient vector)."""
    beta = fit.beta if isinstance(fit, LtsFit) else np.asarray(fit, dtype=np.float64)
    idx = h_subset(data, beta, trim).indices
    g = data.W[idx].T @ residuals(data, beta)[idx]
    return float(np.linalg.norm(g))


def fit(data: Dataset, trim: TrimSpec, config: SolverConfig | None = None) -> LtsFit:
    """Multi-start concentration solve; deterministic given config.seed.

    Draws ``n_starts`` elemental starts (exact fits through p random
    rows), iterates the concentration map on all of them in lockstep, and
    returns the best converged candidate.  Ties on the final objective
    keep the earliest start.  Raises AllStartsDegenerate if no start
    survives rank checks.
    """
    if config is None:
        config = SolverConfig()
    _check_trim(trim, data.n)
    y, W = data.y, data.W
    n, p, h = data.n, data.p, trim.h
    n_starts = config.n_starts

    stream = make_stream(config.seed, 0)
    # p smallest entries of an iid-uniform row = a uniform random p-subset.
    elem = np.argpartition(stream.uniform(size=(n_starts, n)), p - 1, axis=1)[:, :p]
    betas, ok = _solve_general(W[elem], y[elem])

    objs = np.full(n_starts, np.inf)
    iters = np.zeros(n_starts, dtype=np.intp)
    conv = np.zeros(n_starts, dtype=bool)
    keeps = np.zeros((n_starts, h), dtype=np.intp)
    masks = np.zeros((n_starts, n), dtype=bool)
    alive = ok

    act = np.flatnonzero(alive)
    if act.size:
        o, keep, mask = _batch_objective_subsets(y, W, betas[act], h)
        good = np.isfinite(o)
        objs[act] = np.where(good, o, np.inf)
        keeps[act] = keep
        masks[act] = mask
        alive[act[~good]] = False

    for step in range(1, config.max_csteps + 1):
        act = np.flatnonzero(alive & ~conv)
        if act.size == 0:
            break
        new_beta, ok_step = _ls_on_subsets(y, W, keeps[act])
        dead = act[~ok_step]
        alive[dead] = False
        act = act[ok_step]
        if act.size == 0:
            continue
        new_beta = new_beta[ok_step]
        o_new, keep_new, mask_new = _batch_objective_subsets(y, W, new_beta, h)
        finite = np.isfinite(o_new)
        alive[act[~finite]] = False
        act, new_beta, o_new = act[finite], new_beta[finite], o_new[finite]
        keep_new, mask_new = keep_new[finite], mask_new[finite]
        if act.size == 0:
            continue
        same = np.all(mask_new == masks[act], axis=1)
        small = (objs[act] - o_new) <= config.tol_objective * (objs[act] + _TINY)
        betas[act] = new_beta
        objs[act] = o_new
        keeps[act] = keep_new
        masks[act] = mask_new
        iters[act] = step
        conv[act[same | small]] = True

    candidates = alive & np.isfinite(objs)
    if not candidates.any():
        raise AllStartsDegenerate(
            f"all {n_starts} elemental starts hit rank-deficient subsets"
        )
    masked = np.where(candidates, objs, np.inf)
    winner = int(np.argmin(masked))
    beta_win = betas[winner]
    return LtsFit(
        beta=beta_win,
        objective_value=objective(data, beta_win, trim),
        subset=h_subset(data, beta_win, trim),
        iterations=int(iters[winner]),
        converged=bool(conv[winner]),
        start_index=winner,
    )


def exact_enumerate(
    data: Dataset, trim: TrimSpec, max_subsets: int = 2_000_000
) -> LtsFit:
    """Global minimizer by exhaustive h-subset enumeration.

    Fits least squares on every h-subset, scores each candidate on the
    full trimmed objective, and returns the first global minimizer in
    lexicographic subset order.  Raises TooManySubsets beyond the cap.
    """
    _check_trim(trim, data.n)
    n, h = data.n, trim.h
    total = math.comb(n, h)
    if total > max_subsets:
        raise TooManySubsets(f"C({n},{h}) = {total} exceeds cap {max_subsets}")
    best_obj = np.inf
    best_beta = None
    for combo in itertools.combinations(range(n), h):
        try:
            beta = ls_fit_subset(data, np.asarray(combo, dtype=np.intp))
        except SingularMatrix:
            continue
        obj = objective(data, beta, trim)
        if obj < best_obj:
            best_obj = obj
            best_beta = beta
    if best_beta is None:
        raise SingularMatrix("every h-subset is rank-deficient")
    return LtsFit(
        beta=best_beta,
        objective_value=best_obj,
        subset=h_subset(data, best_beta, trim),
        iterations=0,
        converged=True,
        start_index=-1,
    )


def _solve_general(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise solve of stacked square systems; flags failed rows
    instead of raising."""
    k, p = b.shape
    try:
        x = np.linalg.solve(a, b[..., None])[..., 0]
        ok = np.all(np.isfinite(x), axis=1)
    except np.linalg.LinAlgError:
        x = np.zeros((k, p))
        ok = np.zeros(k, dtype=bool)
        for i in range(k):
            try:
                x[i] = np.linalg.solve(a[i], b[i])
                ok[i] = np.all(np.isfinite(x[i]))
            except np.linalg.LinAlgError:
                ok[i] = False
    return x, ok


def _ls_on_subsets(
    y: np.ndarray, W: np.ndarray, subs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Batched least squares on the rows listed in each row of ``subs``."""
    k, h = subs.shape
    p = W.shape[1]
    out = np.empty((k, p))
    ok = np.empty(k, dtype=bool)
    chunk = max(1, _CHUNK_FLOATS // (h * p))
    for lo in range(0, k, chunk):
        sl = slice(lo, min(lo + chunk, k))
        Wsub = W[subs[sl]]
        ysub = y[subs[sl]]
        Wt = Wsub.transpose(0, 2, 1)
        M = Wt @ Wsub
        rhs = (Wt @ ysub[..., None])[..., 0]
        out[sl], ok[sl] = _solve_general(M, rhs)
    return out, ok


def _batch_objective_subsets(
    y: np.ndarray, W: np.ndarray, betas: np.ndarray, h: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trimmed objective, retention indices, and retention mask per beta.

    Rank-h ties are resolved by argpartition here (a measure-zero event
    for continuous data); the public h_subset applies the smallest-index
    rule where the order matters.
    """
    n = y.shape[0]
    r = y[None, :] - betas @ W.T
    r2 = r * r
    keep = np.argpartition(r2, h - 1, axis=1)[:, :h]
    objs = np.take_along_axis(r2, keep, axis=1).sum(axis=1) / n
    mask = np.zeros((betas.shape[0], n), dtype=bool)
    np.put_along_axis(mask, keep, True, axis=1)
    return objs, keep, mask
