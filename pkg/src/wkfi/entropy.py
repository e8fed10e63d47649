"""Gaussian densities, Shannon and weighted differential entropies.

All logarithms are natural. The exponential weight ``phi(x) = exp(t^T x)``
has closed-form normalization ``alpha`` and second-moment matrix ``Phi``;
two forms of ``Phi`` are available (see :func:`phi_matrix_exp`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .spd import (
    DimensionError,
    DomainError,
    SpdMatrix,
    as_spd,
    as_vector,
    convex_combine,
    log_det,
    quad_form,
    trace_inverse_product,
)

LOG_2PI = float(np.log(2.0 * np.pi))
LOG_2PIE = LOG_2PI + 1.0
COND_RTOL = 1e-10

PhiVariant = Literal["paper", "full"]


@dataclass(frozen=True)
class Scenario:
    """Mixture instance ``C = lambda1*C1 + lambda2*C2``."""

    C1: SpdMatrix
    C2: SpdMatrix
    lambda1: float
    C: SpdMatrix = field(init=False, repr=False)

    def __post_init__(self):
        C1, C2 = as_spd(self.C1), as_spd(self.C2)
        lam = float(self.lambda1)
        object.__setattr__(self, "C1", C1)
        object.__setattr__(self, "C2", C2)
        object.__setattr__(self, "lambda1", lam)
        object.__setattr__(self, "C", convex_combine(C1, C2, lam))

    @property
    def lambda2(self) -> float:
        return 1.0 - self.lambda1

    @property
    def dim(self) -> int:
        return self.C.dim

    def components(self):
        """``(weight, matrix)`` pairs for the two mixture components."""
        return ((self.lambda1, self.C1), (self.lambda2, self.C2))


@dataclass(frozen=True)
class WeightFunctional:
    alpha: float
    phi_matrix: NDArray


@dataclass(frozen=True)
class ConditionReport:
    alpha_excess: float
    second_condition: float
    psi: NDArray
    satisfied: bool


def gaussian_pdf(C: SpdMatrix, x: ArrayLike) -> NDArray | float:
    val = np.exp(log_gaussian_pdf(C, x))
    return float(val) if np.ndim(val) == 0 else val


def log_gaussian_pdf(C: SpdMatrix, x: ArrayLike) -> NDArray:
    """``ln f(x)`` for a batch of points of shape ``(..., d)``."""
    x = as_vector(x, C.dim)
    flat = x.reshape(-1, C.dim)
    z = np.linalg.solve(C.chol, flat.T).T
    maha = np.sum(z * z, axis=-1).reshape(x.shape[:-1])
    return -0.5 * (C.dim * LOG_2PI + log_det(C) + maha)


def shannon_entropy_gaussian(C: SpdMatrix) -> float:
    return 0.5 * (C.dim * LOG_2PIE + log_det(C))


def kfi_gap(s: Scenario) -> float:
    """``ln det C - lambda1 ln det C1 - lambda2 ln det C2`` (nonnegative)."""
    return log_det(s.C) - s.lambda1 * log_det(s.C1) - s.lambda2 * log_det(s.C2)


def alpha_exp(C: SpdMatrix, t: ArrayLike) -> float:
    return float(np.exp(0.5 * quad_form(C, t)))


def phi_matrix_exp(C: SpdMatrix, t: ArrayLike, variant: PhiVariant = "paper") -> WeightFunctional:
    """Closed-form ``alpha`` and ``Phi`` for the weight ``exp(t^T x)``.

    ``variant="paper"`` gives ``Phi = C exp(t^T C t / 2)``, which is what makes
    the weighted entropy collapse to ``h(C) * alpha``. ``variant="full"`` gives
    the actual weighted second moment ``(C + C t t^T C) exp(t^T C t / 2)``; the
    quadrature oracle agrees with the latter.
    """
    t = as_vector(t, C.dim)
    alpha = alpha_exp(C, t)
    if variant == "paper":
        phi = C.entries * alpha
    elif variant == "full":
        ct = C.entries @ t
        phi = (C.entries + np.outer(ct, ct)) * alpha
    else:
        raise DomainError(f"unknown Phi variant {variant!r}")
    return WeightFunctional(alpha=alpha, phi_matrix=phi)


def constant_weight(C: SpdMatrix) -> WeightFunctional:
    """Functional for ``phi == 1``: ``alpha = 1`` and ``Phi = C``."""
    return WeightFunctional(alpha=1.0, phi_matrix=C.entries.copy())


def sigma_weighted(C: SpdMatrix, w: WeightFunctional) -> float:
    """Gaussian weighted differential entropy from ``alpha`` and ``Phi``."""
    if np.shape(w.phi_matrix) != (C.dim, C.dim):
        raise DimensionError("weight functional does not match the matrix dimension")
    return 0.5 * w.alpha * (C.dim * LOG_2PI + log_det(C)) + 0.5 * trace_inverse_product(C, w.phi_matrix)


def _scaled_tol(*terms: float) -> float:
    return COND_RTOL * max(1.0, *(abs(x) for x in terms))


def wkfi_conditions(
    s: Scenario, w1: WeightFunctional, w2: WeightFunctional, w: WeightFunctional
) -> ConditionReport:
    """Evaluate both sufficient conditions of the weighted Ky Fan inequality."""
    mix_alpha = s.lambda1 * w1.alpha + s.lambda2 * w2.alpha
    alpha_excess = mix_alpha - w.alpha
    psi = s.lambda1 * np.asarray(w1.phi_matrix) + s.lambda2 * np.asarray(w2.phi_matrix) - np.asarray(w.phi_matrix)
    psi = 0.5 * (psi + psi.T)
    log_norm = s.dim * LOG_2PI + log_det(s.C)
    tr_psi = trace_inverse_product(s.C, psi)
    second = alpha_excess * log_norm + tr_psi
    ok1 = alpha_excess >= -_scaled_tol(mix_alpha, w.alpha)
    tr_parts = [
        lam * trace_inverse_product(s.C, wa.phi_matrix) for lam, wa in ((s.lambda1, w1), (s.lambda2, w2))
    ]
    ok2 = second <= _scaled_tol(
        mix_alpha * log_norm, w.alpha * log_norm, *tr_parts, trace_inverse_product(s.C, w.phi_matrix)
    )
    return ConditionReport(alpha_excess=alpha_excess, second_condition=second, psi=psi, satisfied=bool(ok1 and ok2))


def exponential_functionals(s: Scenario, t: ArrayLike, variant: PhiVariant = "paper"):
    """Functionals for ``C1``, ``C2`` and ``C`` under the same exponential weight."""
    return tuple(phi_matrix_exp(M, t, variant) for M in (s.C1, s.C2, s.C))


def wkfi_gap(s: Scenario, t: ArrayLike, variant: PhiVariant = "paper") -> float:
    """``sigma(C) - lambda1 sigma(C1) - lambda2 sigma(C2)`` for the weight ``exp(t^T x)``."""
    w1, w2, w = exponential_functionals(s, t, variant)
    return sigma_weighted(s.C, w) - s.lambda1 * sigma_weighted(s.C1, w1) - s.lambda2 * sigma_weighted(s.C2, w2)
