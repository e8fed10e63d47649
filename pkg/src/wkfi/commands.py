"""Command implementations behind the ``wkfi`` CLI.

Each ``*_report`` / ``run_*`` function returns a JSON-ready dict so the same
results can be checked in tests without going through argument parsing.
"""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, parse_config
from .ekfi import (
    hess_lambda,
    lambda_gap,
    origin_report,
    region_membership,
    scalar_lambda_1d_printed,
    scalar_region_1d,
    scalar_second_derivative_origin,
    unbounded_1d_exact,
    unbounded_1d_heuristic,
)
from .entropy import Scenario, alpha_exp, phi_matrix_exp, sigma_weighted
from .fd import fd_hessian
from .landscape import (
    LandscapeFields,
    default_seeds,
    find_stationary_points,
    scan_fields,
    summarize,
    window_doubling,
)
from .quadrature import MAX_ORDER, alpha_numeric, certify, phi_numeric, wde_numeric
from .spd import SpdMatrix
from .svg import heatmap_svg, profile_svg

FIGURES = ("fig31a", "fig31b", "fig32", "fig34", "fig35")
ALPHA_FAIL_RTOL = 1e-6
PHI_MATCH_RTOL = 1e-8
SIGMA_ATOL = 1e-10
FD_STEP_ORIGIN = 1e-3


class VerificationFailure(RuntimeError):
    """A closed form or theorem check failed; carries the report."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2) + "\n")


def bundled_config(name: str) -> ScenarioConfig:
    text = resources.files("wkfi.data").joinpath(f"{name}.json").read_text()
    return parse_config(json.loads(text))


# scan


def write_grid_csv(fields: LandscapeFields, path: Path) -> None:
    d = fields.t.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"t{k + 1}" for k in range(d)] + ["sigma", "lambda", "f1", "f2", "in_s"])
        for i in range(len(fields.sigma)):
            row = [f"{v:.17g}" for v in fields.t[i]]
            row += [f"{fields.sigma[i]:.17g}", f"{fields.lambda_[i]:.17g}", f"{fields.f1[i]:.17g}", f"{fields.f2[i]:.17g}"]
            row.append("1" if fields.in_S[i] else "0")
            w.writerow(row)


def read_grid_csv(path: Path) -> dict:
    """Parse a grid CSV back into column arrays."""
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    d = sum(1 for h in header if h.startswith("t"))
    arr = np.array([[float(v) for v in r[:-1]] for r in body]).reshape(len(body), len(header) - 1)
    return {
        "t": arr[:, :d],
        "sigma": arr[:, d],
        "lambda": arr[:, d + 1],
        "f1": arr[:, d + 2],
        "f2": arr[:, d + 3],
        "in_s": np.array([r[-1] == "1" for r in body]),
        "header": header,
    }


def _summary_dict(summary) -> dict:
    o = summary.origin
    return {
        "s_empty_in_window": summary.s_empty_in_window,
        "s_sample_count": summary.s_sample_count,
        "min_lambda_on_S": summary.min_lambda_on_S,
        "max_lambda_on_S": summary.max_lambda_on_S,
        "min_sigma_on_S": summary.min_sigma_on_S,
        "improvement_verdict": summary.improvement_verdict,
        "origin_isolated": summary.origin_isolated,
        "origin": {
            "hessian": o.hessian,
            "eigenvalues": o.eigenvalues,
            "classification": o.classification,
            "paper_sign_hessian": o.paper_sign_hessian,
        },
    }


def render_svg(cfg: ScenarioConfig, fields: LandscapeFields) -> str | None:
    d = cfg.dim
    title = f"{cfg.name}: Lambda(t) with zero contour; dots mark S"
    if d == 2:
        nx, ny = (len(a) for a in fields.axes)
        return heatmap_svg(
            fields.axes[0],
            fields.axes[1],
            fields.lambda_.reshape(nx, ny),
            fields.in_S.reshape(nx, ny),
            title=title,
        )
    if d == 1:
        return profile_svg(fields.axes[0], fields.lambda_, fields.in_S, title=title)
    return None


def run_scan(cfg: ScenarioConfig, out_dir: Path | None = None) -> dict:
    s = cfg.scenario()
    grid = cfg.grid_spec()
    fields = scan_fields(s, grid, cfg.f2_constant)
    summary = summarize(s, fields)
    bounded = window_doubling(s, grid, f2_constant=cfg.f2_constant)
    crit = find_stationary_points(s, default_seeds(grid, cfg.seed)[1:])
    members = fields.in_S & np.isfinite(fields.sigma)
    violations = int(np.sum(fields.sigma[members] < -SIGMA_ATOL))
    report = {
        "tool": "wkfi",
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "grid_points": grid.size,
        "sigma_at_origin": fields.sigma0,
        "summary": _summary_dict(summary),
        "window_doubling": {"factors": bounded.factors, "member_counts": bounded.counts, "bounded": bounded.bounded},
        "theorem_check": {"members_with_negative_sigma": violations, "tolerance": SIGMA_ATOL},
        "stationary_points": [
            {
                "location": r.location,
                "grad_norm": r.grad_norm,
                "eigenvalues": r.eigenvalues,
                "classification": r.classification,
                "converged": r.converged,
                "iterations": r.iterations,
                "fixed_point_residual": r.residual,
            }
            for r in crit
        ],
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_grid_csv(fields, out_dir / "grid.csv")
        dump_json(report, out_dir / "summary.json")
        svg = render_svg(cfg, fields)
        if svg is not None:
            (out_dir / "lambda.svg").write_text(svg)
    report["_fields"] = fields
    return report


# classify


def classify_report(cfg: ScenarioConfig) -> dict:
    s = cfg.scenario()
    rep = origin_report(s)
    zero = np.zeros(s.dim)
    fd = fd_hessian(lambda t: lambda_gap(s, t), zero, FD_STEP_ORIGIN)
    H = hess_lambda(s, zero)
    fd_matches_definition = bool(np.allclose(fd, H, rtol=1e-4, atol=1e-6))
    fd_matches_printed = bool(np.allclose(fd, rep.paper_sign_hessian, rtol=1e-4, atol=1e-6))
    if fd_matches_definition and fd_matches_printed:
        printed = "agrees (curvature vanishes at this tolerance)"
    elif fd_matches_printed:
        printed = "agrees"
    else:
        printed = "disagrees: printed origin Hessian has the opposite sign of the measured curvature"
    return {
        "tool": "wkfi",
        "version": __version__,
        "config": cfg.to_dict(),
        "hessian": rep.hessian,
        "paper_sign_hessian": rep.paper_sign_hessian,
        "eigenvalues": rep.eigenvalues,
        "classification": rep.classification,
        "finite_difference_hessian": fd,
        "finite_difference_step": FD_STEP_ORIGIN,
        "fd_matches_definition": fd_matches_definition,
        "fd_matches_printed": fd_matches_printed,
        "printed_sign_verdict": printed,
    }


# oracle verification


def _probes(cfg: ScenarioConfig) -> list[np.ndarray]:
    """Origin, half-window points on each axis, and the half-window corners."""
    d = cfg.dim
    half = np.array([max(abs(ax["min"]), abs(ax["max"])) for ax in cfg.grid]) * 0.5
    probes = [np.zeros(d)]
    for k in range(d):
        for sgn in (1.0, -1.0):
            t = np.zeros(d)
            t[k] = sgn * half[k]
            probes.append(t)
    if d > 1:
        probes.append(half.copy())
        probes.append(half * np.array([1.0] + [-1.0] * (d - 1)))
    return probes


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    denom = float(np.max(np.abs(b)))
    diff = float(np.max(np.abs(a - b)))
    return diff / denom if denom > 0 else diff


def check_order_for(order: int) -> int:
    return order + 8 if order + 8 <= MAX_ORDER else order - 8


def oracle_rows(M: SpdMatrix, t: np.ndarray, order: int) -> dict:
    check = check_order_for(order)
    a_num = certify(alpha_numeric, M, t, order, check)
    p_num = certify(phi_numeric, M, t, order, check)
    h_num = certify(wde_numeric, M, t, order, check)
    paper = phi_matrix_exp(M, t, "paper")
    full = phi_matrix_exp(M, t, "full")
    return {
        "t": t,
        "alpha_closed": alpha_exp(M, t),
        "alpha_numeric": a_num.value,
        "alpha_rel_err": _rel(alpha_exp(M, t), a_num.value),
        "phi_numeric": p_num.value,
        "phi_paper": paper.phi_matrix,
        "phi_full": full.phi_matrix,
        "phi_paper_rel_err": _rel(paper.phi_matrix, p_num.value),
        "phi_full_rel_err": _rel(full.phi_matrix, p_num.value),
        "wde_numeric": h_num.value,
        "sigma_paper": sigma_weighted(M, paper),
        "sigma_full": sigma_weighted(M, full),
        "sigma_paper_rel_err": _rel(sigma_weighted(M, paper), h_num.value),
        "sigma_full_rel_err": _rel(sigma_weighted(M, full), h_num.value),
        "converged": a_num.converged and p_num.converged and h_num.converged,
        "certificate_rel_change": max(a_num.rel_change, p_num.rel_change, h_num.rel_change),
    }


def _phi_verdict(paper_err: float, full_err: float) -> str:
    p, f = paper_err <= PHI_MATCH_RTOL, full_err <= PHI_MATCH_RTOL
    if p and f:
        return "both"
    if f:
        return "full"
    if p:
        return "paper"
    return "neither"


def arbitration_probe(order: int = 40) -> dict:
    """The fixed one-dimensional case ``c = 1, t = 1`` that decides between the two Phi forms."""
    row = oracle_rows(SpdMatrix([[1.0]]), np.array([1.0]), order)
    verdict = _phi_verdict(row["phi_paper_rel_err"], row["phi_full_rel_err"])
    return {
        "c": 1.0,
        "t": 1.0,
        "phi_numeric": float(np.asarray(row["phi_numeric"]).ravel()[0]),
        "phi_paper_form": float(np.asarray(row["phi_paper"]).ravel()[0]),
        "phi_full_moment_form": float(np.asarray(row["phi_full"]).ravel()[0]),
        "matching_variant": verdict,
        "resolution": (
            "the weighted second moment exp(t'x) x x' under N(0, C) equals (C + C t t' C) exp(t'Ct/2); "
            "the form C exp(t'Ct/2) is kept as the default only because the weighted entropy identity "
            "sigma_t(C) = h(C) exp(t'Ct/2) is built on it"
            if verdict == "full"
            else "quadrature did not single out the full-moment form; see rows"
        ),
    }


def oracle_report(cfg: ScenarioConfig) -> dict:
    s = cfg.scenario()
    order = cfg.quadrature_order
    rows = []
    for label, M in (("C1", s.C1), ("C2", s.C2), ("C", s.C)):
        for t in _probes(cfg):
            r = oracle_rows(M, t, order)
            r["matrix"] = label
            rows.append(r)
    maxes = {
        k: max(r[k] for r in rows)
        for k in ("alpha_rel_err", "phi_paper_rel_err", "phi_full_rel_err", "sigma_paper_rel_err", "sigma_full_rel_err")
    }
    return {
        "tool": "wkfi",
        "version": __version__,
        "config": cfg.to_dict(),
        "order": order,
        "check_order": check_order_for(order),
        "rows": rows,
        "max_rel_err": maxes,
        "non_converged_probes": [
            {"matrix": r["matrix"], "t": r["t"], "rel_change": r["certificate_rel_change"]} for r in rows if not r["converged"]
        ],
        "phi_matching_variant": _phi_verdict(maxes["phi_paper_rel_err"], maxes["phi_full_rel_err"]),
        "sigma_matching_variant": _phi_verdict(maxes["sigma_paper_rel_err"], maxes["sigma_full_rel_err"]),
        "alpha_ok": maxes["alpha_rel_err"] <= ALPHA_FAIL_RTOL,
        "arbitration": arbitration_probe(order),
    }


# figures


def _check_expectations(expect: dict, report: dict) -> dict:
    summ = report["summary"]
    fields: LandscapeFields = report["_fields"]
    members = fields.in_S & ~np.all(fields.t == 0.0, axis=1)
    observed = {
        "verdict": summ["improvement_verdict"],
        "origin": summ["origin"]["classification"],
        "bounded": report["window_doubling"]["bounded"],
        "negative_lambda_on_S": bool(np.any(fields.lambda_[members] < -1e-10)),
        "s_empty": summ["s_empty_in_window"],
    }
    checks = {k: {"expected": v, "observed": observed[k], "met": observed[k] == v} for k, v in expect.items()}
    return checks


def run_figures(out_dir: Path) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for name in FIGURES:
        cfg = bundled_config(name)
        rep = run_scan(cfg, out_dir / name)
        checks = _check_expectations(cfg.expect, rep)
        entries.append(
            {
                "name": name,
                "note": cfg.note,
                "expectations": checks,
                "met": all(c["met"] for c in checks.values()),
                "theorem_violations": rep["theorem_check"]["members_with_negative_sigma"],
                "verdict": rep["summary"]["improvement_verdict"],
                "origin": rep["summary"]["origin"]["classification"],
                "s_sample_count": rep["summary"]["s_sample_count"],
                "window_doubling_counts": rep["window_doubling"]["member_counts"],
            }
        )
    manifest = {
        "tool": "wkfi",
        "version": __version__,
        "figures": entries,
        "all_regimes_met": all(e["met"] for e in entries),
        "theorem_holds": all(e["theorem_violations"] == 0 for e in entries),
    }
    dump_json(manifest, out_dir / "manifest.json")
    return manifest


# one-dimensional check


def check_1d_report(c1: float, c2: float, lambda1: float, t_max: float, n: int) -> dict:
    s = Scenario(SpdMatrix([[c1]]), SpdMatrix([[c2]]), lambda1)
    ts = np.linspace(-t_max, t_max, n)
    profile = []
    for t in ts:
        v = scalar_region_1d(c1, c2, lambda1, t)
        profile.append(
            {
                "t": float(t),
                "lambda": lambda_gap(s, [t]),
                "lambda_printed": scalar_lambda_1d_printed(c1, c2, lambda1, t),
                "f1": v.f1,
                "f2": v.f2,
                "in_s": v.in_S,
            }
        )
    c = lambda1 * c1 + (1.0 - lambda1) * c2
    edge = region_membership(s, [t_max]).in_S and region_membership(s, [-t_max]).in_S
    h = float(hess_lambda(s, [0.0])[0, 0])
    return {
        "c1": c1,
        "c2": c2,
        "lambda1": lambda1,
        "c": c,
        "t_max": t_max,
        "profile": profile,
        "second_derivative_origin": {"printed_convention": scalar_second_derivative_origin(c1, c2, lambda1), "definition": h},
        "unbounded_heuristic_fires": unbounded_1d_heuristic(c1, c2, lambda1),
        "unbounded_asymptotic": unbounded_1d_exact(c1, c2, lambda1),
        "member_at_t_max": bool(edge),
        "member_count": int(sum(p["in_s"] for p in profile)),
    }
