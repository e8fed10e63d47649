"""Exponential-weight Ky Fan gap, its improvement function and the set S.

``Sigma(t)`` is the weighted gap and ``Lambda(t) = Sigma(t) - Sigma(0)`` the
improvement over the unweighted inequality. Gradient and Hessian are derived
from that definition; the sign-flipped forms found in the printed derivation
are kept as ``*_printed`` helpers so reports can show both.

Functions taking ``t`` accept shape ``(d,)`` or a batch ``(..., d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .entropy import LOG_2PI, LOG_2PIE, Scenario
from .spd import DomainError, SpdMatrix, as_vector, log_det, random_spd, sym_eigvalsh, trace_inverse_product

F2Constant = Literal["2pi", "2pie"]
Classification = Literal["local-minimum", "local-maximum", "saddle", "degenerate"]

MEMBER_RTOL = 1e-10
CLASSIFY_RTOL = 1e-8
CLASSIFY_ATOL = 1e-12


@dataclass(frozen=True)
class RegionVerdict:
    f1: float
    f2: float
    in_S: bool


@dataclass(frozen=True)
class OriginReport:
    hessian: NDArray
    eigenvalues: NDArray
    classification: Classification
    paper_sign_hessian: NDArray


def _terms(s: Scenario):
    """``(coefficient, matrix, ln[(2 pi e)^d det])`` with ``Sigma = sum coef * L * exp(q/2)``.

    Identical components cancel exactly, so every coefficient is zeroed then.
    """
    d = s.dim
    if s.C1 == s.C2:
        return tuple((0.0, A, d * LOG_2PIE + log_det(A)) for A in (s.C, s.C1, s.C2))
    return (
        (1.0, s.C, d * LOG_2PIE + log_det(s.C)),
        (-s.lambda1, s.C1, d * LOG_2PIE + log_det(s.C1)),
        (-s.lambda2, s.C2, d * LOG_2PIE + log_det(s.C2)),
    )


def _half_quad(A: SpdMatrix, t: NDArray) -> NDArray:
    return 0.5 * np.maximum(np.einsum("...i,ij,...j->...", t, A.entries, t), 0.0)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def sigma_big(s: Scenario, t: ArrayLike):
    t = as_vector(t, s.dim)
    total = np.zeros(t.shape[:-1])
    for coef, A, logterm in _terms(s):
        if coef != 0.0:
            total = total + coef * logterm * np.exp(_half_quad(A, t))
    return _scalar(total)


def lambda_gap(s: Scenario, t: ArrayLike):
    """``Sigma(t) - Sigma(0)``, as a literal difference so ``Lambda(0) == 0``."""
    t = as_vector(t, s.dim)
    return _scalar(sigma_big(s, t) - sigma_big(s, np.zeros(s.dim)))


def lambda_gap_expanded(s: Scenario, t: ArrayLike):
    """Three-term expansion of ``Lambda`` (log-det part, log-det part, ``d ln(2 pi e)`` part)."""
    t = as_vector(t, s.dim)
    e = np.exp(_half_quad(s.C, t))
    e1 = np.exp(_half_quad(s.C1, t))
    e2 = np.exp(_half_quad(s.C2, t))
    out = log_det(s.C) * (e - 1.0)
    out = out + s.lambda1 * log_det(s.C1) * (1.0 - e1) + s.lambda2 * log_det(s.C2) * (1.0 - e2)
    out = out + s.dim * LOG_2PIE * (e - s.lambda1 * e1 - s.lambda2 * e2)
    return _scalar(out)


def region_terms(s: Scenario, t: ArrayLike, f2_constant: F2Constant = "2pi"):
    """Return ``(f1, f2, tol1, tol2)`` arrays for the set-S conditions.

    ``f2_constant="2pi"`` uses ``ln[(2 pi)^d det C]`` in the second condition;
    ``"2pie"`` swaps in ``(2 pi e)^d``.
    """
    if f2_constant == "2pi":
        log_const = s.dim * LOG_2PI
    elif f2_constant == "2pie":
        log_const = s.dim * LOG_2PIE
    else:
        raise DomainError(f"unknown f2 constant {f2_constant!r}")
    t = as_vector(t, s.dim)
    e = np.exp(_half_quad(s.C, t))
    e1 = s.lambda1 * np.exp(_half_quad(s.C1, t))
    e2 = s.lambda2 * np.exp(_half_quad(s.C2, t))
    mix = e1 + e2
    f1 = mix - e
    log_norm = log_const + log_det(s.C)
    tr1 = trace_inverse_product(s.C, s.C1)
    tr2 = trace_inverse_product(s.C, s.C2)
    f2 = f1 * log_norm + e1 * tr1 + e2 * tr2 - s.dim * e
    tol1 = MEMBER_RTOL * np.maximum(mix, e)
    tol2 = MEMBER_RTOL * (np.maximum(mix, e) * abs(log_norm) + e1 * tr1 + e2 * tr2 + s.dim * e)
    return f1, f2, tol1, tol2


def in_region(s: Scenario, t: ArrayLike, f2_constant: F2Constant = "2pi"):
    f1, f2, tol1, tol2 = region_terms(s, t, f2_constant)
    return (f1 >= -tol1) & (f2 <= tol2)


def region_membership(s: Scenario, t: ArrayLike, f2_constant: F2Constant = "2pi") -> RegionVerdict:
    t = as_vector(t, s.dim)
    if t.ndim != 1:
        raise DomainError("region_membership takes a single point; use region_terms for batches")
    f1, f2, tol1, tol2 = region_terms(s, t, f2_constant)
    return RegionVerdict(f1=float(f1), f2=float(f2), in_S=bool(f1 >= -tol1 and f2 <= tol2))


def grad_lambda(s: Scenario, t: ArrayLike) -> NDArray:
    t = as_vector(t, s.dim)
    g = np.zeros_like(t)
    for coef, A, logterm in _terms(s):
        if coef != 0.0:
            g = g + (coef * logterm * np.exp(_half_quad(A, t)))[..., None] * (t @ A.entries)
    return g


def hess_lambda(s: Scenario, t: ArrayLike) -> NDArray:
    t = as_vector(t, s.dim)
    if t.ndim != 1:
        raise DomainError("hess_lambda takes a single point")
    H = np.zeros((s.dim, s.dim))
    for coef, A, logterm in _terms(s):
        if coef != 0.0:
            At = A.entries @ t
            H += coef * logterm * np.exp(_half_quad(A, t)) * (A.entries + np.outer(At, At))
    return 0.5 * (H + H.T)


def grad_lambda_printed(s: Scenario, t: ArrayLike) -> NDArray:
    """Stationarity expression in the printed sign convention (negated gradient)."""
    return -grad_lambda(s, t)


def hess_lambda_printed(s: Scenario, t: ArrayLike) -> NDArray:
    """Second gradient in the printed sign convention (negated Hessian)."""
    return -hess_lambda(s, t)


def paper_sign_origin_hessian(s: Scenario) -> NDArray:
    """``sum_a lambda_a ln(det C_a) C_a - ln(det C) C``, the origin Hessian as printed."""
    return (
        s.lambda1 * log_det(s.C1) * s.C1.entries
        + s.lambda2 * log_det(s.C2) * s.C2.entries
        - log_det(s.C) * s.C.entries
    )


def classify_eigenvalues(eigenvalues: ArrayLike) -> Classification:
    ev = np.asarray(eigenvalues, dtype=float)
    scale = float(np.max(np.abs(ev))) if ev.size else 0.0
    if scale <= CLASSIFY_ATOL:
        return "degenerate"
    tol = CLASSIFY_RTOL * scale
    pos, neg = ev > tol, ev < -tol
    if pos.all():
        return "local-minimum"
    if neg.all():
        return "local-maximum"
    if pos.any() and neg.any():
        return "saddle"
    return "degenerate"


def origin_report(s: Scenario) -> OriginReport:
    H = hess_lambda(s, np.zeros(s.dim))
    ev = sym_eigvalsh(H)
    return OriginReport(
        hessian=H,
        eigenvalues=ev,
        classification=classify_eigenvalues(ev),
        paper_sign_hessian=paper_sign_origin_hessian(s),
    )


def stationarity_residual(s: Scenario, t: ArrayLike) -> float:
    """Residual of the fixed-point form of the stationarity equation.

    The equation ``t = sum_a lambda_a C^{-1} C_a t exp(t^T (C_a - C) t / 2) L_a / L``
    (``L_x = ln[(2 pi e)^d det x]``) is checked multiplied through by
    ``L exp(t^T C t / 2)`` so it stays defined when ``L = 0``, and normalized by
    the size of its terms.
    """
    t = as_vector(t, s.dim)
    if s.C1 == s.C2:
        return 0.0
    (_, C, LC), (m1, C1, L1), (m2, C2, L2) = _terms(s)
    lhs = LC * np.exp(_half_quad(C, t)) * t
    rhs = sum(
        -m * La * np.exp(_half_quad(A, t)) * C.solve(A.entries @ t) for m, A, La in ((m1, C1, L1), (m2, C2, L2))
    )
    scale = max(1.0, float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)))
    return float(np.linalg.norm(lhs - rhs)) / scale


def stationarity_residual_printed(s: Scenario, t: ArrayLike) -> float:
    """Same residual with the printed denominator ``d`` in place of ``ln[(2 pi e)^d det C]``."""
    t = as_vector(t, s.dim)
    d = s.dim
    e = np.exp(_half_quad(s.C, t))
    rhs = np.zeros(d)
    for lam, A in s.components():
        num = d + d * LOG_2PI + log_det(A)
        rhs = rhs + lam * np.exp(_half_quad(A, t)) / e * s.C.solve(A.entries @ t) * num / d
    return float(np.linalg.norm(t - rhs)) / max(1.0, float(np.linalg.norm(t)))


# one-dimensional specialization


def _check_1d(c1: float, c2: float, lambda1: float):
    if not (c1 > 0 and c2 > 0):
        raise DomainError(f"variances must be positive, got {c1}, {c2}")
    if not 0.0 <= lambda1 <= 1.0:
        raise DomainError(f"lambda1 must lie in [0, 1], got {lambda1}")


def scalar_region_1d(c1: float, c2: float, lambda1: float, t: float) -> RegionVerdict:
    """Both set-S conditions at ``d = 1`` after dividing by ``exp(c t^2 / 2)``.

    Returned ``f1``/``f2`` are the left sides minus one, so they equal the
    general ``f1``/``f2`` divided by ``exp(c t^2 / 2)``.
    """
    _check_1d(c1, c2, lambda1)
    lambda2 = 1.0 - lambda1
    c = lambda1 * c1 + lambda2 * c2
    u = 0.5 * t * t
    e1 = np.exp(lambda2 * (c1 - c2) * u)
    e2 = np.exp(lambda1 * (c2 - c1) * u)
    a = lambda1 * e1 + lambda2 * e2
    f1 = a - 1.0
    f2 = f1 * np.log(2.0 * np.pi * c) + lambda1 * c1 / c * e1 + lambda2 * c2 / c * e2 - 1.0
    tol1 = MEMBER_RTOL * max(a, 1.0)
    tol2 = MEMBER_RTOL * (max(a, 1.0) * abs(np.log(2.0 * np.pi * c)) + (lambda1 * c1 * e1 + lambda2 * c2 * e2) / c + 1.0)
    return RegionVerdict(f1=float(f1), f2=float(f2), in_S=bool(f1 >= -tol1 and f2 <= tol2))


def scalar_lambda_1d_printed(c1: float, c2: float, lambda1: float, t: float) -> float:
    """The one-dimensional improvement function in its printed form (the negative of ``Lambda``)."""
    _check_1d(c1, c2, lambda1)
    lambda2 = 1.0 - lambda1
    c = lambda1 * c1 + lambda2 * c2
    u = 0.5 * t * t
    e, e1, e2 = np.exp(c * u), np.exp(c1 * u), np.exp(c2 * u)
    return float(
        LOG_2PIE * (lambda1 * e1 + lambda2 * e2 - e)
        + lambda1 * np.log(c1) * (e1 - 1.0)
        + lambda2 * np.log(c2) * (e2 - 1.0)
        - np.log(c) * (e - 1.0)
    )


def scalar_second_derivative_origin(c1: float, c2: float, lambda1: float) -> float:
    """``sum_a lambda_a c_a ln c_a - c ln c``; nonnegative by convexity of ``x ln x``."""
    _check_1d(c1, c2, lambda1)
    lambda2 = 1.0 - lambda1
    c = lambda1 * c1 + lambda2 * c2
    return lambda1 * c1 * np.log(c1) + lambda2 * c2 * np.log(c2) - c * np.log(c)


def unbounded_1d_heuristic(c1: float, c2: float, lambda1: float) -> bool:
    """The ``c < 1/(2 pi)`` rule of thumb for an unbounded set S at ``d = 1``."""
    _check_1d(c1, c2, lambda1)
    return lambda1 * c1 + (1.0 - lambda1) * c2 < 1.0 / (2.0 * np.pi)


def unbounded_1d_exact(c1: float, c2: float, lambda1: float) -> bool:
    """Whether S contains all sufficiently large ``|t|`` at ``d = 1``.

    For ``c1 != c2`` and ``0 < lambda1 < 1`` the first condition always holds
    (Jensen), and the second is dominated for large ``t`` by the component with
    the larger variance, with coefficient ``ln(2 pi c) + c_max / c``.
    """
    _check_1d(c1, c2, lambda1)
    if c1 == c2 or lambda1 in (0.0, 1.0):
        return True
    c = lambda1 * c1 + (1.0 - lambda1) * c2
    return np.log(2.0 * np.pi * c) + max(c1, c2) / c < 0.0


# reduced convexity of C -> C ln det C along a segment


def _segment_values(C1: SpdMatrix, C2: SpdMatrix, lams: NDArray) -> NDArray:
    out = np.empty((len(lams), C1.dim, C1.dim))
    for i, lam in enumerate(lams):
        M = lam * C1.entries + (1.0 - lam) * C2.entries
        out[i] = M * np.linalg.slogdet(M)[1]
    return out


@dataclass(frozen=True)
class ConvexityProbe:
    convex: bool
    worst_lambda: float
    worst_eigenvalue: float
    scale: float


def reduced_convexity_details(C1: SpdMatrix, C2: SpdMatrix, n_lambda: int) -> ConvexityProbe:
    if n_lambda < 3:
        raise DomainError(f"n_lambda must be at least 3, got {n_lambda}")
    lams = np.linspace(0.0, 1.0, n_lambda)
    G = _segment_values(C1, C2, lams)
    second = G[:-2] - 2.0 * G[1:-1] + G[2:]
    mins = np.array([sym_eigvalsh(m)[0] for m in second])
    scale = max(1.0, float(np.max(np.abs(G))))
    k = int(np.argmin(mins))
    return ConvexityProbe(
        convex=bool(mins[k] >= -1e-9 * scale),
        worst_lambda=float(lams[k + 1]),
        worst_eigenvalue=float(mins[k]),
        scale=scale,
    )


def reduced_convexity_probe(C1: SpdMatrix, C2: SpdMatrix, n_lambda: int) -> bool:
    """True iff every second difference of ``lambda -> C(lambda) ln det C(lambda)`` is PSD."""
    return reduced_convexity_details(C1, C2, n_lambda).convex


def reduced_convexity_sweep(n_pairs: int, n_lambda: int = 41, dim: int = 2, seed: int = 0) -> dict:
    """Run the probe on random SPD pairs and collect counterexamples."""
    rng = np.random.default_rng(seed)
    counterexamples = []
    for i in range(n_pairs):
        C1, C2 = random_spd(rng, dim), random_spd(rng, dim)
        probe = reduced_convexity_details(C1, C2, n_lambda)
        if not probe.convex:
            counterexamples.append(
                {
                    "index": i,
                    "C1": C1.entries.tolist(),
                    "C2": C2.entries.tolist(),
                    "lambda": probe.worst_lambda,
                    "min_eigenvalue": probe.worst_eigenvalue,
                }
            )
    return {
        "n_pairs": n_pairs,
        "n_lambda": n_lambda,
        "dim": dim,
        "seed": seed,
        "all_convex": not counterexamples,
        "n_counterexamples": len(counterexamples),
        "counterexamples": counterexamples,
    }
