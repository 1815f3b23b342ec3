"""Command-line front end.

Subcommands: ``coeffs``, ``step``, ``integrate``, ``convergence`` and
``figure {1,2,3}``.  Output is CSV on stdout or in ``--out``.  The file is
written only after the whole result is computed.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import DegenerateNodesError, closed_form_weights, even_sequence, final_correction_sequence, odd_sequence
from .harness import (InsufficientSignalError, csv_lines, figure1_data, figure2_data, figure3_data, global_order,
                      local_order, max_norm, scheme_for_order)
from .kernels import KernelKind
from .mpe import BranchError, StepError, build_custom, build_final_correction, integrate
from .numerics import DOUBLE, MatrixOverflowError, get_precision, rational_to_real
from .nystrom import METHODS, ForceField, PhaseState, anharmonic_accel
from .problems import PROBLEMS, SingularityError, get_problem

KERNELS = {k.value: k for k in KernelKind}
NUMERICAL_ERRORS = (SingularityError, InsufficientSignalError, BranchError, StepError, MatrixOverflowError,
                    ArithmeticError, FloatingPointError)


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    subcommand: str
    problem: str = "matrix2x2"
    kernel: KernelKind | None = None
    parity: str | None = None
    order: int | None = None
    steps: int = 1
    t0: str | None = None
    t1: str = "1"
    precision: str = "double"
    out: Path | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpesplit", description="Multi-product splitting integrators")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("coeffs", help="exact extrapolation weights")
    c.add_argument("--parity", choices=["even", "odd"])
    c.add_argument("--n", type=int)
    c.add_argument("--ks", type=_int_list)
    c.add_argument("--final", type=int, metavar="M", help="final-correction set {M, n-1, ..., 1}")

    def common(p, default_problem="matrix2x2"):
        p.add_argument("--problem", default=default_problem)
        p.add_argument("--precision", default="double")
        p.add_argument("--dps", type=int, default=None, help="digits for extended precision")
        p.add_argument("--out", type=Path)

    def scheme_flags(p):
        p.add_argument("--order", type=int)
        p.add_argument("--parity", choices=["even", "odd"])
        p.add_argument("--kernel")
        p.add_argument("--ks", type=_int_list)
        p.add_argument("--final", type=int, metavar="M")

    s = sub.add_parser("step", help="one explicit Nystrom step")
    s.add_argument("--method", required=True)
    common(s, "anharmonic")
    s.add_argument("--h", default="0.1")
    s.add_argument("--t0", default=None)
    s.add_argument("--dim", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)

    i = sub.add_parser("integrate", help="trajectory of an extrapolated scheme")
    common(i)
    scheme_flags(i)
    i.add_argument("--steps", type=int, default=1)
    i.add_argument("--t0")
    i.add_argument("--t1", default="1")
    i.add_argument("--start", choices=["offset", "regularized"], help="hydrogen start")

    v = sub.add_parser("convergence", help="fitted convergence order")
    common(v)
    scheme_flags(v)
    v.add_argument("--mode", choices=["local", "global"], default="local")
    v.add_argument("--h", type=_str_list, default=["0.4", "0.2", "0.1"])
    v.add_argument("--steps-list", type=_int_list, default=[4, 8, 16])
    v.add_argument("--t1", default="1")

    f = sub.add_parser("figure", help="figure data as CSV")
    f.add_argument("number", type=int, choices=[1, 2, 3])
    f.add_argument("--orders", type=_int_list)
    f.add_argument("--points", type=int, default=200)
    f.add_argument("--precision", default=None)
    f.add_argument("--dps", type=int, default=None)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out", type=Path)
    return ap


# ---------------------------------------------------------------------------


def _precision(args):
    name = args.precision or "double"
    if name not in ("double", "extended"):
        raise UsageError("--precision", f"expected double or extended, got {name!r}")
    return get_precision(name, args.dps) if args.dps else get_precision(name)


def _problem(args, prec):
    if args.problem not in PROBLEMS:
        raise UsageError("--problem", f"unknown problem {args.problem!r}; choose from {', '.join(sorted(PROBLEMS))}")
    opts = {}
    if getattr(args, "start", None):
        if args.problem != "hydrogen":
            raise UsageError("--start", "only the hydrogen problem has a start option")
        opts["start"] = args.start
    return get_problem(args.problem, prec, **opts)


def _kernel(args):
    if args.kernel is None:
        return None
    if args.kernel not in KERNELS:
        raise UsageError("--kernel", f"unknown kernel {args.kernel!r}; choose from {', '.join(KERNELS)}")
    return KERNELS[args.kernel]


def _scheme(args, problem):
    kernel = _kernel(args)
    if args.ks:
        k = kernel or (KernelKind.ODD_BASIS if args.parity == "odd" else problem.default_kernel)
        try:
            return build_custom(args.ks, k)
        except (ValueError, DegenerateNodesError) as exc:
            raise UsageError("--ks", str(exc)) from None
    if args.order is None:
        raise UsageError("--order", "required unless --ks is given")
    if args.order < 1:
        raise UsageError("--order", "must be positive")
    parity = "even" if args.order % 2 == 0 else "odd"
    if args.parity and args.parity != parity:
        raise UsageError("--order", f"order {args.order} is {parity} but --parity {args.parity} was given")
    if kernel is not None:
        if parity == "even" and not kernel.symmetric:
            raise UsageError("--kernel", f"even orders need a symmetric kernel, got {kernel.value}")
        if parity == "odd" and kernel is not KernelKind.ODD_BASIS:
            raise UsageError("--kernel", f"odd orders use the odd basis kernel, got {kernel.value}")
    if parity == "even":
        kernel = kernel or problem.default_kernel
    if args.final is not None:
        if parity == "odd":
            raise UsageError("--final", "final correction needs an even order")
        try:
            return build_final_correction(args.final, args.order // 2, kernel)
        except (ValueError, DegenerateNodesError) as exc:
            raise UsageError("--final", str(exc)) from None
    return scheme_for_order(args.order, kernel)


def _state_columns(problem):
    return ["y00", "y01", "y10", "y11"] if problem.name == "matrix2x2" else ["q", "p"]


# ---------------------------------------------------------------------------


def cmd_coeffs(args) -> list[str]:
    if args.ks:
        if args.n is not None or args.parity or args.final is not None:
            raise UsageError("--ks", "cannot be combined with --n, --parity or --final")
        ks = args.ks
    else:
        if args.n is None or args.n < 1:
            raise UsageError("--n", "a positive --n is required without --ks")
        if args.final is not None:
            if args.parity == "odd":
                raise UsageError("--final", "final correction sets are even")
            ks = final_correction_sequence(args.final, args.n)
        elif args.parity == "odd":
            ks = odd_sequence(args.n)
        elif args.parity == "even":
            ks = even_sequence(args.n)
        else:
            raise UsageError("--parity", "required unless --ks is given")
    try:
        ws = closed_form_weights(ks)
    except (ValueError, DegenerateNodesError) as exc:
        raise UsageError("--ks" if args.ks else "--n", str(exc)) from None
    rows = [f"{k},{c.numerator}/{c.denominator},{DOUBLE.format(rational_to_real(c, DOUBLE))}"
            for k, c in zip(ws.ks, ws.cs)]
    return ["k,weight,decimal"] + rows


def cmd_step(args) -> list[str]:
    if args.method not in METHODS:
        raise UsageError("--method", f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    prec = _precision(args)
    with prec.context():
        h = prec.real(args.h)
        if args.problem == "anharmonic":
            rng = np.random.default_rng(args.seed)
            q, v = rng.normal(size=args.dim), rng.normal(size=args.dim)
            if prec.is_extended:
                q, v = prec.array(q), prec.array(v)
            t = prec.real(args.t0 or 0)
            accel = anharmonic_accel
        else:
            problem = _problem(args, prec)
            if problem.accel is None:
                raise UsageError("--problem", f"{problem.name} has no force; use anharmonic, oscillator or hydrogen")
            t = prec.real(args.t0) if args.t0 else problem.t_start
            st = problem.exact(t) if args.t0 else problem.initial_state
            q, v = st[0:1], st[1:2]
            accel = problem.accel
        F = ForceField(accel)
        out = METHODS[args.method](F, PhaseState(q, v, t), h)
        qs, vs = np.ravel(out.q), np.ravel(out.v)
        cols = ["t"] + [f"q{i}" for i in range(len(qs))] + [f"v{i}" for i in range(len(vs))] + ["force_evaluations"]
        row = [out.t, *qs, *vs, F.evaluations]
        return csv_lines(cols, [row], prec, {"method": args.method, "seed": args.seed})


def cmd_integrate(args) -> list[str]:
    if args.steps < 1:
        raise UsageError("--steps", "must be >= 1")
    prec = _precision(args)
    with prec.context():
        problem = _problem(args, prec)
        scheme = _scheme(args, problem)
        t0 = prec.real(args.t0) if args.t0 is not None else problem.t_start
        t1 = prec.real(args.t1)
        if t1 == t0:
            raise UsageError("--t1", "must differ from the start time")
        state0 = problem.initial_state if args.t0 is None else problem.exact(t0)
        traj = integrate(scheme, problem.system, state0, t0, t1, args.steps)
        rows = []
        for cs in traj:
            err = max_norm(cs.state, problem.exact(cs.t)) if problem.exact else float("nan")
            rows.append([cs.t, *np.ravel(cs.state), err])
        return csv_lines(["t", *_state_columns(problem), "error_vs_exact"], rows, prec,
                         {"problem": problem.name, "kernel": scheme.kernel.value, "scheme": scheme.describe()})


def cmd_convergence(args) -> list[str]:
    prec = _precision(args)
    with prec.context():
        problem = _problem(args, prec)
        scheme = _scheme(args, problem)
        if args.mode == "local":
            if len(args.h) < 3:
                raise UsageError("--h", "need at least three step sizes")
            rep = local_order(problem, scheme, args.h)
        else:
            if len(args.steps_list) < 2:
                raise UsageError("--steps-list", "need at least two step counts")
            rep = global_order(problem, scheme, args.t1, args.steps_list)
        rows = [[h, e, int(u)] for h, e, u in rep.rows()]
        return csv_lines(["h", "error", "used"], rows, DOUBLE,
                         {"problem": problem.name, "kernel": scheme.kernel.value, "scheme": scheme.describe(),
                          "mode": args.mode, "fitted_order": f"{rep.fitted_order:.4f}",
                          "fit_residual": f"{rep.fit_residual:.3e}", "precision_used": prec.name})


def cmd_figure(args) -> list[str]:
    if args.points < 2:
        raise UsageError("--points", "need at least two grid points")
    if args.jobs < 1:
        raise UsageError("--jobs", "must be >= 1")
    if args.number == 1:
        if args.orders:
            raise UsageError("--orders", "figure 1 has fixed orders")
        return figure1_data(_precision(args), args.points)
    orders = args.orders or ([4, 8, 16, 24] if args.number == 2 else [24, 40, 56, 64, 72])
    if any(o < 1 for o in orders):
        raise UsageError("--orders", "orders must be positive")
    if args.number == 2:
        args.precision = args.precision or "extended"
        return figure2_data(orders, _precision(args), args.points, jobs=args.jobs)
    if args.precision not in (None, "extended"):
        raise UsageError("--precision", "figure 3 always compares double with extended")
    args.precision = "extended"
    return figure3_data(orders, args.points, extended=_precision(args), jobs=args.jobs)


COMMANDS = {"coeffs": cmd_coeffs, "step": cmd_step, "integrate": cmd_integrate,
            "convergence": cmd_convergence, "figure": cmd_figure}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        lines = COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"mpesplit {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"mpesplit {args.subcommand}: numerical failure: {exc}", file=sys.stderr)
        return 1
    text = "\n".join(lines) + "\n"
    if getattr(args, "out", None):
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
