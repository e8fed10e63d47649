"""Grid scans of Lambda and the set S, stationary points, scenario summaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .ekfi import (
    F2Constant,
    OriginReport,
    classify_eigenvalues,
    grad_lambda,
    hess_lambda,
    lambda_gap,
    origin_report,
    region_terms,
    sigma_big,
    stationarity_residual,
)
from .entropy import Scenario
from .spd import DimensionError, DomainError, sym_eigvalsh

MAX_GRID_POINTS = 10**7
LAMBDA_ATOL = 1e-10
GRAD_RTOL = 1e-10
DEDUP_DIST = 1e-6
MAX_HALVINGS = 30
DEFAULT_SEED = 20150101
N_RANDOM_SEEDS = 8

Verdict = Literal["improvement", "deterioration", "mixed", "vacuous"]


class GridGuardError(DomainError):
    def __init__(self, required: int, allowed: int = MAX_GRID_POINTS):
        super().__init__(f"grid needs {required} points, at most {allowed} allowed")
        self.required = required
        self.allowed = allowed


@dataclass(frozen=True)
class GridSpec:
    axis_ranges: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.axis_ranges)
        res = tuple(int(n) for n in self.resolution)
        if len(ranges) != len(res) or not ranges:
            raise DomainError("axis_ranges and resolution must have the same nonzero length")
        for lo, hi in ranges:
            if not lo < hi:
                raise DomainError(f"axis range ({lo}, {hi}) is empty")
        if any(n < 3 for n in res):
            raise DomainError(f"every axis needs at least 3 samples, got {res}")
        # symmetric windows get an odd count so 0 is a node
        res = tuple(n + 1 if lo == -hi and n % 2 == 0 else n for (lo, hi), n in zip(ranges, res))
        total = int(np.prod(res, dtype=np.int64))
        if total > MAX_GRID_POINTS:
            raise GridGuardError(total)
        object.__setattr__(self, "axis_ranges", ranges)
        object.__setattr__(self, "resolution", res)

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    def axes(self) -> list[NDArray]:
        """Per-axis sample values; an axis whose range contains 0 samples it exactly."""
        out = []
        for (lo, hi), n in zip(self.axis_ranges, self.resolution):
            x = np.linspace(lo, hi, n)
            if lo < 0.0 < hi:
                k = int(np.argmin(np.abs(x)))
                x[k] = 0.0
            out.append(x)
        return out

    def points(self) -> NDArray:
        """All grid points, row-major (last axis fastest), shape ``(n, d)``."""
        axes = self.axes()
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def scaled(self, factor: float, keep_spacing: bool = True) -> "GridSpec":
        """Window scaled about the origin; with ``keep_spacing`` the sample count grows too."""
        ranges = tuple((lo * factor, hi * factor) for lo, hi in self.axis_ranges)
        if keep_spacing:
            res = tuple(int(round((n - 1) * factor)) + 1 for n in self.resolution)
        else:
            res = self.resolution
        return GridSpec(ranges, res)


@dataclass(frozen=True)
class LandscapeSample:
    t: NDArray
    sigma: float
    lambda_: float
    f1: float
    f2: float
    in_S: bool


@dataclass(frozen=True)
class LandscapeFields:
    """Column-oriented scan result; row ``i`` is grid point ``i`` in row-major order."""

    t: NDArray
    sigma: NDArray
    lambda_: NDArray
    f1: NDArray
    f2: NDArray
    in_S: NDArray
    sigma0: float
    axes: list = field(default_factory=list)

    def samples(self) -> list[LandscapeSample]:
        return [
            LandscapeSample(self.t[i], float(self.sigma[i]), float(self.lambda_[i]), float(self.f1[i]), float(self.f2[i]), bool(self.in_S[i]))
            for i in range(len(self.sigma))
        ]


def scan_fields(s: Scenario, grid: GridSpec, f2_constant: F2Constant = "2pi") -> LandscapeFields:
    if grid.dim != s.dim:
        raise DimensionError(f"{grid.dim}-dimensional grid for a {s.dim}-dimensional scenario")
    T = grid.points()
    with np.errstate(over="ignore", invalid="ignore"):
        sigma = np.asarray(sigma_big(s, T), dtype=float).reshape(-1)
        sigma0 = float(sigma_big(s, np.zeros(s.dim)))
        lam = sigma - sigma0
        f1, f2, tol1, tol2 = region_terms(s, T, f2_constant)
        in_S = (f1 >= -tol1) & (f2 <= tol2)
    return LandscapeFields(
        t=T,
        sigma=sigma,
        lambda_=lam,
        f1=np.asarray(f1, dtype=float).reshape(-1),
        f2=np.asarray(f2, dtype=float).reshape(-1),
        in_S=np.asarray(in_S, dtype=bool).reshape(-1),
        sigma0=sigma0,
        axes=grid.axes(),
    )


def scan(s: Scenario, grid: GridSpec, f2_constant: F2Constant = "2pi") -> list[LandscapeSample]:
    return scan_fields(s, grid, f2_constant).samples()


@dataclass(frozen=True)
class CriticalPointReport:
    location: NDArray
    grad_norm: float
    eigenvalues: NDArray
    classification: str
    converged: bool
    iterations: int
    residual: float = float("nan")


def _grad_tol(s: Scenario, t: NDArray) -> float:
    return GRAD_RTOL * (1.0 + abs(lambda_gap(s, t)))


def newton_stationary(s: Scenario, seed: ArrayLike, max_iter: int = 50) -> CriticalPointReport:
    """Damped Newton iteration on ``grad Lambda = 0`` from one seed."""
    if max_iter < 1:
        raise DomainError("max_iter must be at least 1")
    t = np.array(seed, dtype=float).reshape(s.dim)
    if not np.all(np.isfinite(t)):
        raise DomainError(f"seed {seed!r} is not finite")
    converged = False
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        g = grad_lambda(s, t)
        gnorm = float(np.linalg.norm(g))
        for it in range(max_iter + 1):
            if not np.isfinite(gnorm):
                break
            if gnorm <= _grad_tol(s, t):
                converged = True
                break
            if it == max_iter:
                break
            H = hess_lambda(s, t)
            step = np.linalg.lstsq(H, -g, rcond=None)[0]
            for _ in range(MAX_HALVINGS + 1):
                cand = t + step
                gc = grad_lambda(s, cand)
                gcn = float(np.linalg.norm(gc))
                if np.isfinite(gcn) and gcn < gnorm:
                    break
                step = 0.5 * step
            else:
                break
            t, g, gnorm = cand, gc, gcn
        if np.all(np.isfinite(t)) and np.isfinite(gnorm):
            ev = sym_eigvalsh(hess_lambda(s, t))
            cls = classify_eigenvalues(ev)
            res = stationarity_residual(s, t)
        else:
            ev, cls, res = np.full(s.dim, np.nan), "degenerate", float("nan")
    return CriticalPointReport(
        location=t,
        grad_norm=gnorm,
        eigenvalues=ev,
        classification=cls,
        converged=converged,
        iterations=it,
        residual=res,
    )


def default_seeds(grid: GridSpec, rng_seed: int = DEFAULT_SEED, n_random: int = N_RANDOM_SEEDS) -> list[NDArray]:
    """Origin, the window corners, then uniform interior points from a fixed PRNG seed."""
    seeds = [np.zeros(grid.dim)]
    seeds += [np.array(c, dtype=float) for c in product(*grid.axis_ranges)]
    rng = np.random.default_rng(rng_seed)
    lo = np.array([r[0] for r in grid.axis_ranges])
    hi = np.array([r[1] for r in grid.axis_ranges])
    seeds += list(rng.uniform(lo, hi, size=(n_random, grid.dim)))
    return seeds


def find_stationary_points(s: Scenario, seeds: Sequence[ArrayLike], max_iter: int = 50) -> list[CriticalPointReport]:
    """One Newton run per seed (origin always included); converged duplicates are merged."""
    all_seeds = [np.zeros(s.dim)] + [np.asarray(x, dtype=float).reshape(s.dim) for x in seeds]
    reports: list[CriticalPointReport] = []
    for seed in all_seeds:
        rep = newton_stationary(s, seed, max_iter)
        if rep.converged and any(
            r.converged and np.linalg.norm(r.location - rep.location) < DEDUP_DIST for r in reports
        ):
            continue
        reports.append(rep)
    return reports


@dataclass(frozen=True)
class ScenarioSummary:
    s_empty_in_window: bool
    s_sample_count: int
    min_lambda_on_S: float | None
    max_lambda_on_S: float | None
    improvement_verdict: Verdict
    origin: OriginReport
    origin_isolated: bool = False
    min_sigma_on_S: float | None = None


def _as_fields(samples) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    if isinstance(samples, LandscapeFields):
        return samples.t, samples.lambda_, samples.sigma, samples.in_S
    samples = list(samples)
    if not samples:
        raise DomainError("cannot summarize an empty sample sequence")
    t = np.array([x.t for x in samples], dtype=float)
    lam = np.array([x.lambda_ for x in samples], dtype=float)
    sig = np.array([x.sigma for x in samples], dtype=float)
    ins = np.array([x.in_S for x in samples], dtype=bool)
    return t, lam, sig, ins


def _origin_isolated(t: NDArray, in_S: NDArray, is_origin: NDArray) -> bool:
    """True when the origin is sampled but none of its adjacent grid points is in S."""
    if not is_origin.any():
        return False
    spacing = []
    for j in range(t.shape[1]):
        u = np.abs(t[:, j])
        u = u[u > 0]
        spacing.append(u.min() if u.size else np.inf)
    adjacent = np.all(np.abs(t) <= np.array(spacing) * (1.0 + 1e-9), axis=1) & ~is_origin
    return not bool(np.any(in_S[adjacent]))


def summarize(s: Scenario, samples) -> ScenarioSummary:
    """Aggregate S-membership statistics and the improvement verdict.

    ``samples`` is a sequence of :class:`LandscapeSample` or a
    :class:`LandscapeFields`. If every S-member has ``Lambda == 0`` (within
    tolerance) the verdict is ``mixed`` with zero extremes.
    """
    t, lam, sig, in_S = _as_fields(samples)
    if len(lam) == 0:
        raise DomainError("cannot summarize an empty sample sequence")
    is_origin = np.all(t == 0.0, axis=1)
    members = in_S & np.isfinite(lam)
    others = members & ~is_origin
    count = int(members.sum())
    min_l = float(lam[members].min()) if count else None
    max_l = float(lam[members].max()) if count else None
    min_sig = float(sig[members].min()) if count else None
    if not others.any():
        verdict: Verdict = "vacuous"
    elif np.all(np.abs(lam[members]) <= LAMBDA_ATOL):
        verdict = "mixed"
    elif min_l >= -LAMBDA_ATOL and np.any(lam[members] > LAMBDA_ATOL):
        verdict = "improvement"
    elif float(lam[others].max()) <= -LAMBDA_ATOL:
        verdict = "deterioration"
    else:
        verdict = "mixed"
    return ScenarioSummary(
        s_empty_in_window=not others.any(),
        s_sample_count=count,
        min_lambda_on_S=min_l,
        max_lambda_on_S=max_l,
        improvement_verdict=verdict,
        origin=origin_report(s),
        origin_isolated=_origin_isolated(t, members, is_origin),
        min_sigma_on_S=min_sig,
    )


@dataclass(frozen=True)
class BoundednessReport:
    factors: tuple[float, ...]
    counts: tuple[int, ...]
    bounded: bool


def window_doubling(
    s: Scenario, grid: GridSpec, factors: Sequence[float] = (2.0, 4.0), f2_constant: F2Constant = "2pi"
) -> BoundednessReport:
    """Count S-members as the window grows at constant grid spacing.

    The set is reported bounded (relative to the window) when the count does
    not change under any of the enlargements.
    """
    facs = (1.0, *[float(f) for f in factors])
    counts = tuple(int(scan_fields(s, grid.scaled(f), f2_constant).in_S.sum()) for f in facs)
    return BoundednessReport(factors=facs, counts=counts, bounded=len(set(counts)) == 1)
