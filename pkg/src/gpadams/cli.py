"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 certification failure,
3 divergence in a non-ensemble solve.
"""
from __future__ import annotations

import argparse
import sys

from . import coeffs as _coeffs
from .experiments import run_convergence, run_ensemble, write_convergence, write_ensemble
from .gpcond import verify_propositions
from .models import MODELS
from .polybasis import MAX_AB_STEPS, build_basis, format_polynomial
from .solver import DivergenceError, Scheme

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number_list(kind):
    def parse(values):
        out = []
        for v in values:
            out += [kind(x) for x in v.split(",") if x]
        return out
    return parse


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _family(value: str) -> Scheme:
    return {"ab": Scheme.AB, "am": Scheme.AM_PC, "am_pc": Scheme.AM_PC}[value]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpadams", description="Probabilistic Adams integrators derived from a GP prior.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="derive the GP conditional laws and compare with classical tables")
    d.add_argument("--check", action="store_true", help="exit 2 unless every cell passes")
    d.add_argument("--max-steps", type=int, default=5)
    d.add_argument("--csv", action="store_true", help="CSV instead of an aligned table")

    c = sub.add_parser("coeffs", help="print exact method coefficients")
    c.add_argument("--family", choices=("ab", "am"), required=True)
    c.add_argument("--steps", type=int, required=True)

    b = sub.add_parser("basis", help="dump the basis polynomials as exact fractions")
    b.add_argument("--family", choices=("ab", "am"), required=True)
    b.add_argument("--steps", type=int, required=True)
    b.add_argument("--augmented", action="store_true")

    e = sub.add_parser("ensemble", help="Monte Carlo realisations of one model")
    e.add_argument("--model", required=True)
    e.add_argument("--steps", type=int, required=True)
    e.add_argument("--h", type=float, required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--t-end", type=float, required=True)
    e.add_argument("--probabilistic", type=_on_off, default=True)
    e.add_argument("--family", choices=("ab", "am"), default="ab")
    e.add_argument("--stride", type=int, default=1, help="write every k-th grid point")
    e.add_argument("--out", required=True)

    v = sub.add_parser("converge", help="empirical convergence study")
    v.add_argument("--model", required=True)
    v.add_argument("--steps-list", nargs="+", required=True)
    v.add_argument("--h-list", nargs="+", required=True)
    v.add_argument("--n", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--probe-t", type=float, required=True)
    v.add_argument("--probabilistic", type=_on_off, default=True)
    v.add_argument("--family", choices=("ab", "am"), default="ab")
    v.add_argument("--out", required=True)
    return p


def _cmd_derive(args) -> int:
    if not 1 <= args.max_steps <= MAX_AB_STEPS:
        raise UsageError(f"--max-steps must be in [1, {MAX_AB_STEPS}]")
    report = verify_propositions(args.max_steps)
    if args.csv:
        print(",".join(report.header))
        for row in report.rows():
            print(",".join(row))
    else:
        print(report.format_table())
    if args.check and not report.passed:
        return EXIT_CHECK
    return EXIT_OK


def _cmd_coeffs(args) -> int:
    try:
        if args.family == "ab":
            betas = _coeffs.ab_coefficients(args.steps)
        else:
            betas = _coeffs.am_coefficients(args.steps)
        C = _coeffs.truncation_constant(args.family, args.steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(" ".join(str(b) for b in betas))
    print(f"truncation_constant {C}")
    return EXIT_OK


def _cmd_basis(args) -> int:
    try:
        basis = build_basis(args.family, args.steps, args.augmented)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    scale = f"alpha*h^{basis.alpha_exponent}"
    print(f"# {args.family.upper()} s={args.steps} nodes={list(basis.nodes)} (u = omega/h)")
    for k, (p, P, a) in enumerate(zip(basis.phi, basis.Phi, basis.alpha_powers)):
        tag = f"  [x {scale}]" if a else ""
        print(f"phi[{k}] = {format_polynomial(p)}{tag}")
        print(f"Phi[{k}] = {format_polynomial(P)}{tag}")
    return EXIT_OK


def _check_model(name):
    if name not in MODELS:
        raise UsageError(f"unknown model {name!r}; registered models: {', '.join(sorted(MODELS))}")


def _cmd_ensemble(args) -> int:
    _check_model(args.model)
    if args.n < 1 or args.stride < 1:
        raise UsageError("--n and --stride must be positive")
    try:
        record = run_ensemble(args.model, args.steps, args.h, args.n, args.seed, args.t_end,
                              probabilistic=args.probabilistic, scheme=_family(args.family))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    paths = write_ensemble(record, args.out, stride=args.stride)
    for r, k in enumerate(record.diverged_at):
        if k >= 0:
            print(f"replicate {r} diverged at step {k}", file=sys.stderr)
    print(f"wrote {paths['trajectories']} and {paths['summary']}")
    return EXIT_OK


def _cmd_converge(args) -> int:
    _check_model(args.model)
    try:
        s_list = _number_list(int)(args.steps_list)
        h_list = _number_list(float)(args.h_list)
        report = run_convergence(args.model, s_list, h_list, args.n, args.seed, args.probe_t,
                                 probabilistic=args.probabilistic, scheme=_family(args.family))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_convergence(report, args.out)
    for a, s in enumerate(report.s_list):
        flag = "  floor-limited" if report.floor_limited[a].any() else ""
        print(f"s={s} slope={report.slopes[a]:.3f} +/- {report.slope_stderr[a]:.3f}{flag}")
    return EXIT_OK


COMMANDS = {
    "derive": _cmd_derive,
    "coeffs": _cmd_coeffs,
    "basis": _cmd_basis,
    "ensemble": _cmd_ensemble,
    "converge": _cmd_converge,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gpadams {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"gpadams {args.command}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
