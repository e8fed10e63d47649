"""Command-line entry point.

Exit codes: 0 ok, 2 config error, 3 grid guard, 4 I/O error, 5 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .commands import (
    VerificationFailure,
    check_1d_report,
    classify_report,
    dump_json,
    oracle_report,
    run_figures,
    run_scan,
)
from .config import F2_CONSTANTS, PHI_VARIANTS, ConfigError, load_config
from .landscape import GridGuardError
from .spd import DomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_IO = 4
EXIT_VERIFY = 5


def _add_config_args(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out", required=out_required, help="output directory")
    p.add_argument("--order", type=int, help="Gauss-Hermite order per axis")
    p.add_argument("--phi-variant", choices=PHI_VARIANTS)
    p.add_argument("--f2-constant", choices=F2_CONSTANTS)
    p.add_argument("--window-scale", type=float, metavar="K", help="multiply every grid axis range by K")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wkfi", description="Weighted Ky Fan inequality lab.")
    parser.add_argument("--version", action="version", version=f"wkfi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_config_args(sub.add_parser("scan", help="grid scan of Lambda over the config window"), out_required=True)
    _add_config_args(sub.add_parser("classify", help="Hessian and classification of the origin"))
    _add_config_args(sub.add_parser("oracle-verify", help="closed forms against Gauss-Hermite quadrature"))
    fig = sub.add_parser("figures", help="run the bundled figure scenarios")
    fig.add_argument("--out", required=True)
    one = sub.add_parser("check-1d", help="one-dimensional profile and region checks")
    one.add_argument("--c1", type=float, required=True)
    one.add_argument("--c2", type=float, required=True)
    one.add_argument("--lambda1", type=float, required=True)
    one.add_argument("--t-max", type=float, default=20.0)
    one.add_argument("--n", type=int, default=201)
    one.add_argument("--out", help="optional directory for check_1d.json")
    return parser


def _resolved_config(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(
        order=args.order,
        phi_variant=args.phi_variant,
        f2_constant=args.f2_constant,
        window_scale=args.window_scale,
    )


def _write_report(report: dict, args, name: str) -> None:
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_json(report, out / name)


def _fmt_vec(v) -> str:
    return np.array2string(np.asarray(v, dtype=float), precision=8, separator=", ")


def cmd_scan(args) -> int:
    cfg = _resolved_config(args)
    rep = run_scan(cfg, Path(args.out))
    summ = rep["summary"]
    print(f"scenario {cfg.name}: {rep['grid_points']} grid points")
    print(f"  S members: {summ['s_sample_count']}  verdict: {summ['improvement_verdict']}")
    print(f"  Lambda on S: [{summ['min_lambda_on_S']:.6g}, {summ['max_lambda_on_S']:.6g}]")
    print(f"  origin: {summ['origin']['classification']}  eigenvalues {_fmt_vec(summ['origin']['eigenvalues'])}")
    wd = rep["window_doubling"]
    print(f"  window doubling counts {wd['member_counts']} bounded={wd['bounded']}")
    print(f"  wrote {args.out}/grid.csv, summary.json" + (", lambda.svg" if cfg.dim <= 2 else ""))
    if rep["theorem_check"]["members_with_negative_sigma"]:
        print("  Sigma < 0 on a member of S", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _resolved_config(args)
    rep = classify_report(cfg)
    print(f"origin Hessian (definition):      {_fmt_vec(rep['hessian'])}")
    print(f"origin Hessian (printed sign):    {_fmt_vec(rep['paper_sign_hessian'])}")
    print(f"finite differences (h={rep['finite_difference_step']}): {_fmt_vec(rep['finite_difference_hessian'])}")
    print(f"eigenvalues: {_fmt_vec(rep['eigenvalues'])}  classification: {rep['classification']}")
    print(f"printed sign convention: {rep['printed_sign_verdict']}")
    _write_report(rep, args, "classify.json")
    if not rep["fd_matches_definition"]:
        print("analytic Hessian disagrees with finite differences", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_oracle_verify(args) -> int:
    cfg = _resolved_config(args)
    rep = oracle_report(cfg)
    print(f"quadrature order {rep['order']} (check order {rep['check_order']}), {len(rep['rows'])} probes")
    for k, v in rep["max_rel_err"].items():
        print(f"  max {k}: {v:.3e}")
    print(f"  Phi variant matching the defining integral: {rep['phi_matching_variant']}")
    print(f"  sigma variant matching the weighted entropy integral: {rep['sigma_matching_variant']}")
    arb = rep["arbitration"]
    print(
        f"  c=1, t=1: phi_numeric={arb['phi_numeric']:.10g} variant paper={arb['phi_paper_form']:.10g} "
        f"variant full={arb['phi_full_moment_form']:.10g} -> {arb['matching_variant']}"
    )
    for p in rep["non_converged_probes"]:
        print(f"  not converged: {p['matrix']} t={_fmt_vec(p['t'])} rel change {p['rel_change']:.2e}")
    _write_report(rep, args, "oracle.json")
    if not rep["alpha_ok"]:
        print("alpha closed form disagrees with quadrature beyond 1e-6", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_figures(args) -> int:
    manifest = run_figures(Path(args.out))
    for e in manifest["figures"]:
        status = "met" if e["met"] else "NOT met"
        print(f"{e['name']}: {status}; verdict {e['verdict']}, origin {e['origin']}, S members {e['s_sample_count']}")
        for k, c in e["expectations"].items():
            print(f"    {k}: expected {c['expected']}, observed {c['observed']}")
    print(f"wrote {args.out}/manifest.json")
    if not manifest["theorem_holds"]:
        print("Sigma < 0 on a member of S in a bundled scenario", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_check_1d(args) -> int:
    if not (args.c1 > 0 and args.c2 > 0):
        raise DomainError("c1 and c2 must be positive")
    if not 0.0 <= args.lambda1 <= 1.0:
        raise DomainError("lambda1 must lie in [0, 1]")
    if not args.t_max > 0 or args.n < 2:
        raise DomainError("need t-max > 0 and n >= 2")
    rep = check_1d_report(args.c1, args.c2, args.lambda1, args.t_max, args.n)
    print(f"c = {rep['c']:.10g}; S members {rep['member_count']} of {args.n} on [-{args.t_max:g}, {args.t_max:g}]")
    for p in rep["profile"][:: max(1, args.n // 10)]:
        print(f"  t={p['t']: .4f}  Lambda={p['lambda']: .6e}  in S={p['in_s']}")
    sd = rep["second_derivative_origin"]
    print(f"second derivative at 0: printed convention {sd['printed_convention']:.10g}, definition {sd['definition']:.10g}")
    print(f"small-c heuristic fires: {rep['unbounded_heuristic_fires']}")
    print(f"asymptotic membership for large |t|: {rep['unbounded_asymptotic']}")
    print(f"member at |t| = t_max: {rep['member_at_t_max']}")
    _write_report(rep, args, "check_1d.json")
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "classify": cmd_classify,
    "oracle-verify": cmd_oracle_verify,
    "figures": cmd_figures,
    "check-1d": cmd_check_1d,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which already matches the config code
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GridGuardError as exc:
        print(f"grid guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
