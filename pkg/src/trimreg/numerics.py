"""Numeric kernel: symmetric solves, normal/chi-square special functions,
and seedable random streams.

Everything here is deterministic given its inputs. The special functions
are thin validated wrappers over scipy.special; the symmetric solver adds
an explicit relative pivot tolerance on top of the LAPACK Cholesky
factorization so rank-deficient systems fail loudly instead of returning
garbage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import special

from .errors import DimensionMismatch, DomainError, SingularMatrix

# A Matrix is a plain 2-D float64 ndarray (row-major); no wrapper class.
Matrix = np.ndarray

# Relative pivot floor for the symmetric factorization: a diagonal pivot
# below PIVOT_RTOL * max(diag) is treated as rank deficiency.
PIVOT_RTOL = 1e-12

# Fixed multiplier spreading derived stream ids across the 64-bit id space
# so children of adjacent parents cannot collide with each other or with
# small user-chosen ids.
_DERIVE_MULT = 0x9E3779B97F4A7C15
_U64 = 1 << 64


def spd_solve(a: Matrix, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive-definite ``a``.

    Raises SingularMatrix when the Cholesky factorization fails or any
    pivot falls below ``PIVOT_RTOL * max(diag(a))``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != matrix order {a.shape[0]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError("spd_solve requires finite entries")
    scale = np.max(np.abs(a)) or 1.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-8 * scale):
        raise DimensionMismatch("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    max_diag = float(np.max(np.diag(a)))
    if max_diag <= 0.0:
        raise SingularMatrix("matrix has no positive diagonal entry")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrix(f"Cholesky factorization failed: {exc}") from exc
    pivots = np.diag(factor[0]) ** 2
    if np.min(pivots) < PIVOT_RTOL * max_diag:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below tolerance {PIVOT_RTOL * max_diag:.3e}"
        )
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def normal_cdf(x):
    """Standard normal CDF Phi(x); accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("normal_cdf requires finite input")
    out = special.ndtr(x)
    return float(out) if out.ndim == 0 else out


def normal_pdf(x):
    """Standard normal density phi(x)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def normal_quantile(p):
    """Inverse of the standard normal CDF; requires 0 < p < 1."""
    p = np.asarray(p, dtype=np.float64)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("normal_quantile requires 0 < p < 1")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def chi2_quantile(df: int, p: float) -> float:
    """Quantile of the chi-square distribution with integer df >= 1.

    Accepts 0 <= p < 1 and returns 0 at p = 0.  Satisfies the one-degree
    identity chi2_quantile(1, p) == normal_quantile((1+p)/2)**2.
    """
    if int(df) != df or df < 1:
        raise DomainError(f"df must be a positive integer, got {df!r}")
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must be in [0, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    return float(2.0 * special.gammaincinv(0.5 * df, p))


@dataclass
class RandomStream:
    """Reproducible random source keyed by (seed, stream_id).

    Identical keys reproduce the identical draw sequence; distinct
    stream ids give statistically independent sequences (PCG64 seeded
    through a SeedSequence over both integers).  Streams are single-owner:
    hand each worker its own instance.
    """

    seed: int
    stream_id: int = 0
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(
            entropy=self.seed % _U64, spawn_key=(self.stream_id % _U64,)
        )
        self._rng = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._rng

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        return self._rng.uniform(low, high, size=size)

    def normal(self, size=None):
        return self._rng.standard_normal(size=size)

    def integers(self, low, high=None, size=None):
        return self._rng.integers(low, high, size=size)

    def child(self, index: int) -> "RandomStream":
        """Derived stream for worker ``index``; reproducible from its own
        (seed, stream_id) pair via make_stream."""
        return RandomStream(self.seed, derive_stream_id(self.stream_id, index))


def derive_stream_id(parent_id: int, index: int) -> int:
    """Stream id of the ``index``-th child of ``parent_id`` (collision-spread
    across the 64-bit id space)."""
    return (parent_id * _DERIVE_MULT + 1 + index) % _U64


def make_stream(seed: int, stream_id: int = 0) -> RandomStream:
    """Create a reproducible RandomStream for the given key."""
    return RandomStream(seed, stream_id)
