"""Tensor-product Gauss-Hermite evaluation of Gaussian integrals.

Rules use the probabilists' convention, so the standard normal density is
folded into the weights and ``E[g(X)]`` for ``X ~ N(0, C)`` is a plain
weighted sum of ``g(L z)`` over the node grid, ``L`` the Cholesky factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.typing import ArrayLike, NDArray

from .entropy import log_gaussian_pdf
from .spd import DomainError, SpdMatrix, as_vector

DEFAULT_ORDER = 40
CHECK_ORDER = 48
CERT_RTOL = 1e-9
MIN_ORDER, MAX_ORDER = 2, 64


class QuadratureError(RuntimeError):
    """The integrand could not be evaluated on the node set."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class NonConvergence(QuadratureError):
    """Two quadrature orders disagree beyond the certificate tolerance."""


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: NDArray
    weights: NDArray


@lru_cache(maxsize=None)
def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule for the standard normal weight (weights sum to one)."""
    if not isinstance(order, (int, np.integer)) or not MIN_ORDER <= order <= MAX_ORDER:
        raise DomainError(f"quadrature order must be an integer in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    nodes, weights = hermegauss(int(order))
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(order=int(order), nodes=nodes, weights=weights)


@lru_cache(maxsize=32)
def _tensor_grid(order: int, dim: int):
    rule = gauss_hermite(order)
    z = np.array(list(product(rule.nodes, repeat=dim)))
    w = np.prod(np.array(list(product(rule.weights, repeat=dim))), axis=1)
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def gaussian_expectation(C: SpdMatrix, g: Callable[[NDArray], ArrayLike], order: int = DEFAULT_ORDER):
    """``E[g(X)]`` for ``X ~ N(0, C)``.

    ``g`` receives all nodes at once as an ``(n, d)`` array and returns either
    ``(n,)`` values or ``(n, ...)`` array values; the result has the trailing
    shape.
    """
    z, w = _tensor_grid(order, C.dim)
    x = z @ C.chol.T
    vals = np.asarray(g(x), dtype=float)
    if vals.shape[:1] != (len(w),):
        raise QuadratureError(f"integrand returned shape {vals.shape} for {len(w)} nodes")
    finite = np.isfinite(vals.reshape(len(w), -1)).all(axis=1)
    if not finite.all():
        bad = x[np.argmin(finite)]
        raise QuadratureError(f"integrand is not finite at node {bad.tolist()}", node=bad)
    out = np.tensordot(w, vals, axes=(0, 0))
    return float(out) if out.ndim == 0 else out


def _exp_weight(t: NDArray) -> Callable[[NDArray], NDArray]:
    return lambda x: np.exp(x @ t)


def alpha_numeric(C: SpdMatrix, t: ArrayLike, order: int = DEFAULT_ORDER) -> float:
    t = as_vector(t, C.dim)
    return gaussian_expectation(C, _exp_weight(t), order)


def phi_numeric(C: SpdMatrix, t: ArrayLike, order: int = DEFAULT_ORDER) -> NDArray:
    t = as_vector(t, C.dim)

    def g(x):
        return np.einsum("ni,nj->nij", x, x) * np.exp(x @ t)[:, None, None]

    m = gaussian_expectation(C, g, order)
    return 0.5 * (m + m.T)


def wde_numeric(C: SpdMatrix, t: ArrayLike, order: int = DEFAULT_ORDER) -> float:
    """Weighted differential entropy ``-E[exp(t^T X) ln f(X)]``."""
    t = as_vector(t, C.dim)
    return gaussian_expectation(C, lambda x: -np.exp(x @ t) * log_gaussian_pdf(C, x), order)


@dataclass(frozen=True)
class Certified:
    """A quadrature value together with its two-order convergence check."""

    value: object
    check_value: object
    rel_change: float
    converged: bool


def certify(
    integral: Callable[..., object],
    C: SpdMatrix,
    t: ArrayLike,
    order: int = DEFAULT_ORDER,
    check_order: int = CHECK_ORDER,
    rtol: float = CERT_RTOL,
    strict: bool = False,
) -> Certified:
    """Evaluate ``integral(C, t, order)`` at two orders and compare.

    With ``strict=True`` a failed certificate raises :class:`NonConvergence`.
    """
    a = np.asarray(integral(C, t, order), dtype=float)
    b = np.asarray(integral(C, t, check_order), dtype=float)
    denom = np.max(np.abs(b))
    diff = np.max(np.abs(a - b))
    rel = float(diff / denom) if denom > 0 else float(diff)
    ok = rel <= rtol
    if strict and not ok:
        raise NonConvergence(f"order {order} vs {check_order} relative change {rel:.3e} exceeds {rtol:.1e}")
    conv = lambda v: float(v) if v.ndim == 0 else v
    return Certified(value=conv(a), check_value=conv(b), rel_change=rel, converged=ok)
