"""Small dense symmetric positive-definite matrices.

Everything here is sized for 1 <= d <= 3. Matrices are stored together with
their lower Cholesky factor so determinants, solves and quadratic forms never
need an explicit inverse.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

MAX_DIM = 3
# Cholesky pivots below this fraction of the largest diagonal entry are rejected.
PIVOT_RTOL = 1e-10


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class DimensionError(DomainError):
    """Raised when operands of different dimension are combined."""


class SpdMatrix:
    """Immutable symmetric positive-definite matrix with a cached factor.

    The input is symmetrized by mirroring its lower triangle, then factorized.
    Construction fails if any Cholesky pivot is below ``PIVOT_RTOL`` times the
    largest diagonal entry.
    """

    __slots__ = ("_entries", "_chol")

    def __init__(self, entries: ArrayLike):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        d = a.shape[0]
        if not 1 <= d <= MAX_DIM:
            raise DimensionError(f"dimension {d} outside 1..{MAX_DIM}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix has non-finite entries")
        a = np.tril(a) + np.tril(a, -1).T
        max_diag = float(np.max(np.diag(a)))
        if max_diag <= 0.0:
            raise DomainError("matrix is not positive definite")
        L = _cholesky(a, PIVOT_RTOL * max_diag)
        a.setflags(write=False)
        L.setflags(write=False)
        self._entries = a
        self._chol = L

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> NDArray:
        return self._entries

    @property
    def chol(self) -> NDArray:
        return self._chol

    def solve(self, b: ArrayLike) -> NDArray:
        """Return ``C^{-1} b`` for a vector or a matrix right-hand side."""
        y = solve_triangular(self._chol, b, lower=True)
        return solve_triangular(self._chol.T, y, lower=False)

    def __array__(self, dtype=None, copy=None):
        return np.array(self._entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(self._entries.tobytes())

    def __repr__(self):
        return f"SpdMatrix({self._entries.tolist()!r})"


def _cholesky(a: NDArray, min_pivot: float) -> NDArray:
    d = a.shape[0]
    L = np.zeros_like(a)
    for j in range(d):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > min_pivot:
            raise DomainError(
                f"matrix is not strictly positive definite (pivot {pivot:.3e} at index {j})"
            )
        L[j, j] = np.sqrt(pivot)
        for i in range(j + 1, d):
            L[i, j] = (a[i, j] - L[i, :j] @ L[j, :j]) / L[j, j]
    return L


def as_spd(c) -> SpdMatrix:
    return c if isinstance(c, SpdMatrix) else SpdMatrix(c)


def as_vector(t: ArrayLike, dim: int) -> NDArray:
    v = np.atleast_1d(np.asarray(t, dtype=float))
    if v.shape[-1] != dim:
        raise DimensionError(f"vector of length {v.shape[-1]} used with a {dim}x{dim} matrix")
    return v


def spd_from_sigma_rho(sigma: float, rho: float) -> SpdMatrix:
    """2x2 covariance with common variance ``sigma**2`` and correlation ``rho``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not abs(rho) < 1:
        raise DomainError(f"|rho| must be below 1, got {rho}")
    s2 = sigma * sigma
    return SpdMatrix([[s2, rho * s2], [rho * s2, s2]])


def convex_combine(C1: SpdMatrix, C2: SpdMatrix, lambda1: float) -> SpdMatrix:
    if C1.dim != C2.dim:
        raise DimensionError(f"cannot combine {C1.dim}x{C1.dim} with {C2.dim}x{C2.dim}")
    if not 0.0 <= lambda1 <= 1.0:
        raise DomainError(f"lambda1 must lie in [0, 1], got {lambda1}")
    if lambda1 == 1.0 or C1 == C2:
        return C1
    if lambda1 == 0.0:
        return C2
    return SpdMatrix(lambda1 * C1.entries + (1.0 - lambda1) * C2.entries)


def log_det(C: SpdMatrix) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(C.chol))))


def quad_form(C: SpdMatrix, t: ArrayLike) -> NDArray | float:
    """``t^T C t``; ``t`` may carry leading batch axes."""
    v = as_vector(t, C.dim)
    q = np.einsum("...i,ij,...j->...", v, C.entries, v)
    # exact zero at t = 0 and never negative from round-off
    q = np.maximum(q, 0.0)
    return float(q) if np.ndim(q) == 0 else q


def trace_inverse_product(C: SpdMatrix, A: SpdMatrix | ArrayLike) -> float:
    """``tr(C^{-1} A)`` via two triangular solves."""
    a = np.asarray(A.entries if isinstance(A, SpdMatrix) else A, dtype=float)
    if a.shape != (C.dim, C.dim):
        raise DimensionError(f"shape {a.shape} does not match {C.dim}x{C.dim}")
    return float(np.trace(C.solve(a)))


def sym_eigvalsh(a: ArrayLike) -> NDArray:
    """Ascending eigenvalues of a small symmetric matrix."""
    a = np.asarray(a, dtype=float)
    return np.linalg.eigvalsh(0.5 * (a + a.T))


def random_spd(rng: np.random.Generator, dim: int, low: float = 0.2, high: float = 3.0) -> SpdMatrix:
    """Random SPD matrix with Haar-random eigenvectors and eigenvalues uniform in [low, high]."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    ev = rng.uniform(low, high, dim)
    return SpdMatrix((q * ev) @ q.T)
