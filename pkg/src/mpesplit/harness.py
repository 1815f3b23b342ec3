"""Convergence-order fits, uniform-convergence sweeps, round-off studies and figure data."""
from __future__ import annotations

import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from . import __version__
from .kernels import ClockedState, KernelKind
from .mpe import MpeScheme, build_even, build_odd, integrate, mpe_step
from .numerics import DOUBLE, EXTENDED, Precision, get_precision
from .problems import Problem, get_problem, magnus_f_series

FLOOR_FACTOR = 100
DEFAULT_GRID_POINTS = 200


class InsufficientSignalError(RuntimeError):
    """Too few error values above the round-off floor to fit an order."""


@dataclass
class ConvergenceReport:
    scheme: str
    hs: list
    errors: list
    fitted_order: float
    fit_residual: float
    precision: str
    used: list = field(default_factory=list)
    force_evaluations: int | None = None

    def rows(self):
        return list(zip(self.hs, self.errors, self.used))


def max_norm(a, b=None) -> float:
    d = np.asarray(a) if b is None else np.asarray(a) - np.asarray(b)
    return float(max(abs(x) for x in np.ravel(d))) if d.size else 0.0


def fit_order(hs: Sequence[float], errors: Sequence[float], floor: float = 0.0) -> tuple[float, float, list[bool]]:
    """Least-squares slope of log(error) against log(h), ignoring errors at or below ``floor``."""
    used = [e > floor for e in errors]
    pts = [(math.log(h), math.log(e)) for h, e, u in zip(hs, errors, used) if u]
    if len(pts) < 2:
        raise InsufficientSignalError(f"only {len(pts)} error values above the floor {floor:.3g}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), resid, used


def scheme_for_order(order: int, kernel: KernelKind | None = None) -> MpeScheme:
    """Even order 2n -> build_even(n, kernel); odd order 2n-1 -> build_odd(n)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if order % 2 == 0:
        return build_even(order // 2, kernel or KernelKind.STRANG_BA)
    if kernel not in (None, KernelKind.ODD_BASIS):
        raise ValueError(f"odd order {order} needs the odd basis kernel, got {kernel.value}")
    return build_odd((order + 1) // 2)


def _floor(problem: Problem, reference) -> float:
    return float(FLOOR_FACTOR * problem.precision.eps * max(1.0, max_norm(reference)))


def local_order(problem: Problem, scheme: MpeScheme, h_list: Sequence) -> ConvergenceReport:
    """Error of one scheme application of width h from the problem's start state."""
    if problem.exact is None:
        raise ValueError(f"{problem.name} has no exact solution")
    if len(h_list) < 3:
        raise ValueError("need at least three step sizes")
    prec = problem.precision
    with prec.context():
        hs = sorted((prec.real(h) for h in h_list), reverse=True)
        errors, floor = [], 0.0
        start = problem.start()
        for h in hs:
            out = mpe_step(scheme, problem.system, start, h)
            ref = problem.exact(problem.t_start + h)
            errors.append(max_norm(out.state, ref))
            floor = max(floor, _floor(problem, ref))
        slope, resid, used = fit_order([float(h) for h in hs], errors, floor)
    return ConvergenceReport(scheme.describe(), [float(h) for h in hs], errors, slope, resid, prec.name, used)


def global_order(problem: Problem, scheme: MpeScheme, t_end, steps_list: Sequence[int],
                 observe: str = "end") -> ConvergenceReport:
    """Integrate to ``t_end`` with each step count and fit error against step size.

    ``observe="end"`` measures the final state.  ``observe="substate"`` (for
    final-correction schemes) measures the last uncorrected second-order
    substate before the end.
    """
    if len(steps_list) < 2:
        raise ValueError("need at least two step counts")
    if problem.exact is None:
        raise ValueError(f"{problem.name} has no exact solution")
    prec = problem.precision
    with prec.context():
        t0, t1 = problem.t_start, prec.real(t_end)
        hs, errors, floor = [], [], 0.0
        for steps in sorted(steps_list):
            traj = integrate(scheme, problem.system, problem.initial_state, t0, t1, steps)
            if observe == "end":
                cs = traj[-1]
            elif observe == "substate":
                if scheme.final_m is None:
                    raise ValueError("substate observation needs a final-correction scheme")
                cs = traj[-2]
            else:
                raise ValueError(f"unknown observation {observe!r}")
            ref = problem.exact(cs.t)
            hs.append(float((t1 - t0) / steps))
            errors.append(max_norm(cs.state, ref))
            floor = max(floor, _floor(problem, ref))
        slope, resid, used = fit_order(hs, errors, floor)
    return ConvergenceReport(scheme.describe(), hs, errors, slope, resid, prec.name, used)


# ---------------------------------------------------------------------------
# sweeps


def uniform_grid(t_lo, t_hi, points: int = DEFAULT_GRID_POINTS, precision: Precision = DOUBLE) -> list:
    with precision.context():
        lo, hi = precision.real(t_lo), precision.real(t_hi)
        return [lo + (hi - lo) * i / (points - 1) for i in range(points)]


def single_application(problem: Problem, scheme: MpeScheme, t_grid: Sequence) -> list:
    """Observable after one scheme application from the start to each grid time."""
    prec = problem.precision
    with prec.context():
        t0 = problem.t_start
        widths = [prec.real(t) - t0 for t in t_grid]
        if problem.batchable:
            h = prec.array(widths) if prec.is_extended else np.asarray(widths, dtype=float)
            state = np.repeat(np.asarray(problem.initial_state)[:, None], len(widths), axis=1)
            clocks = np.full(len(widths), t0, dtype=object if prec.is_extended else float)
            out = mpe_step(scheme, problem.system, ClockedState(state, clocks), h).state
            return [problem_observable(problem, out[:, i]) for i in range(len(widths))]
        results = []
        for w in widths:
            if w == 0:
                results.append(problem_observable(problem, problem.initial_state))
                continue
            out = mpe_step(scheme, problem.system, problem.start(), w).state
            results.append(problem_observable(problem, out))
        return results


def problem_observable(problem: Problem, state):
    """q for the radial problems, the upper-right entry for the matrix problem."""
    state = np.asarray(state)
    return state[0, 1] if state.ndim == 2 and problem.name == "matrix2x2" else state[0]


@dataclass
class SweepTable:
    problem: str
    precision: str
    kernel: str
    t_grid: list
    exact: list
    values: dict  # order -> list of observables
    errors: dict  # order -> list of |value - exact|

    def max_error(self, order: int) -> float:
        return max(self.errors[order])


def _sweep_worker(args):
    name, options, prec_name, dps, order, kernel_value, grid = args
    prec = get_precision(prec_name, dps)
    with prec.context():
        problem = get_problem(name, prec, **options)
        kernel = KernelKind(kernel_value) if kernel_value else None
        grid = [prec.real(t) for t in grid]
        return single_application(problem, scheme_for_order(order, _kernel_for(order, kernel, problem)), grid)


def _kernel_for(order, kernel, problem):
    if order % 2:
        return None
    return kernel or problem.default_kernel


def uniform_convergence_sweep(problem: Problem, orders: Sequence[int], t_grid: Sequence,
                              kernel: KernelKind | None = None, jobs: int = 1,
                              problem_options: dict | None = None) -> SweepTable:
    """Max error over the grid for each order, one application per grid point."""
    if problem.exact is None:
        raise ValueError(f"{problem.name} has no exact solution")
    prec = problem.precision
    with prec.context():
        grid = [prec.real(t) for t in t_grid]
        exact = [problem_observable(problem, problem.exact(t)) for t in grid]
        if jobs > 1:
            opts = problem_options if problem_options is not None else _problem_options(problem)
            payload = [(problem.name, opts, prec.name, prec.dps, o, kernel.value if kernel else None,
                        [str(t) if prec.is_extended else t for t in grid]) for o in orders]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_worker, payload))
        else:
            results = [single_application(problem, scheme_for_order(o, _kernel_for(o, kernel, problem)), grid)
                       for o in orders]
        values = dict(zip(orders, results))
        errors = {o: [abs(v - e) for v, e in zip(values[o], exact)] for o in orders}
    kname = kernel.value if kernel else problem.default_kernel.value
    return SweepTable(problem.name, prec.name, kname, grid, exact, values, errors)


def _problem_options(problem: Problem) -> dict:
    opts = {}
    if problem.name == "hydrogen":
        opts["start"] = "regularized" if problem.options.get("regularize") else "offset"
    if problem.name == "matrix2x2":
        opts = dict(problem.options)
    return opts


@dataclass
class RoundoffTable:
    orders: list
    t_grid: list
    double: SweepTable
    extended: SweepTable
    onset: int | None

    def max_errors(self):
        return [(o, self.double.max_error(o), self.extended.max_error(o)) for o in self.orders]


def roundoff_onset(orders, deviations, ext_err, threshold: float = 0.01):
    """First order from which the double/extended disagreement stays above
    ``threshold`` times the extended-precision max error.

    ``deviations[i]`` is the max over the grid of |double value - extended value|.
    """
    bad = [d > threshold * e for d, e in zip(deviations, ext_err)]
    for i, o in enumerate(orders):
        if all(bad[i:]):
            return o
    return None


def roundoff_study(problem_name: str, orders: Sequence[int], t_grid: Sequence,
                   precision_pair: tuple[Precision, Precision] = (DOUBLE, EXTENDED),
                   kernel: KernelKind | None = None, jobs: int = 1, **problem_options) -> RoundoffTable:
    lo, hi = precision_pair
    tables = []
    for prec in (lo, hi):
        with prec.context():
            problem = get_problem(problem_name, prec, **problem_options)
            tables.append(uniform_convergence_sweep(problem, orders, t_grid, kernel, jobs, problem_options))
    d, e = tables
    devs = [max(abs(float(a) - float(b)) for a, b in zip(d.values[o], e.values[o])) for o in orders]
    onset = roundoff_onset(list(orders), devs, [float(e.max_error(o)) for o in orders])
    return RoundoffTable(list(orders), list(t_grid), d, e, onset)


# ---------------------------------------------------------------------------
# Taylor coefficients of single-application results


def taylor_coefficients(fn, degree: int, t_max, fit_degree: int | None = None, points: int | None = None,
                        dps: int = 60, t_min=0) -> list:
    """Power-series coefficients of ``fn(width)`` about width 0.

    ``fn`` maps a list of widths to values.  A polynomial of ``fit_degree``
    is fitted by least squares at Chebyshev points on [t_min, t_max] in
    ``dps``-digit arithmetic and coefficients 0..degree are returned.
    Single applications on these problems are polynomials (or entire
    functions) of the width, so the fit recovers their low-order
    coefficients.  A positive ``t_min`` keeps the nodes away from a
    near-singular start such as the hydrogen offset.
    """
    fit_degree = fit_degree or degree + 6
    points = points or 2 * (fit_degree + 1)
    with mpmath.workdps(dps):
        lo, hi = mpmath.mpf(t_min), mpmath.mpf(t_max)
        nodes = [lo + (hi - lo) * (1 + mpmath.cos(mpmath.pi * (2 * i + 1) / (2 * points))) / 2
                 for i in range(points)]
        values = [mpmath.mpf(v) for v in fn(nodes)]
        scaled = [x / hi for x in nodes]
        a = mpmath.matrix([[x**j for j in range(fit_degree + 1)] for x in scaled])
        coef, _ = mpmath.qr_solve(a, mpmath.matrix(values))
        return [coef[j] / hi**j for j in range(degree + 1)]


# ---------------------------------------------------------------------------
# figure data and CSV


@lru_cache(maxsize=None)
def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def csv_lines(columns: Sequence[str], rows, prec: Precision, meta: dict) -> list[str]:
    """A '#' metadata line, the column header, then the data rows."""
    head = " ".join(f"{k}={v}" for k, v in {"precision": prec.name, **meta, "version": version_string()}.items())
    lines = [f"# {head}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(prec.format(x) if not isinstance(x, (int, str)) else str(x) for x in row))
    return lines


def figure1_data(precision: Precision = DOUBLE, points: int = DEFAULT_GRID_POINTS, t_max=4,
                 magnus_orders=(4, 6, 8, 10), mpe_orders=(2, 4, 6, 8, 10)) -> list[str]:
    """Upper-right entry of the 2x2 problem: exact, Magnus partial sums, even MPE."""
    with precision.context():
        problem = get_problem("matrix2x2", precision)
        grid = uniform_grid(0, t_max, points, precision)
        sweep = uniform_convergence_sweep(problem, mpe_orders, grid, KernelKind.FROZEN_MIDPOINT)
        rows = []
        for i, t in enumerate(grid):
            rows.append([t, sweep.exact[i]] + [magnus_f_series(t, o, precision) for o in magnus_orders]
                        + [sweep.values[o][i] for o in mpe_orders])
        cols = ["t", "exact"] + [f"magnus_{o}" for o in magnus_orders] + [f"mpe_{o}" for o in mpe_orders]
        return csv_lines(cols, rows, precision, {"problem": "matrix2x2", "kernel": "midpoint",
                                                  "scheme": "single-application"})


def figure2_data(orders: Sequence[int], precision: Precision = EXTENDED, points: int = DEFAULT_GRID_POINTS,
                 t_lo="0.1", t_hi=5, kernel: KernelKind | None = None, jobs: int = 1) -> list[str]:
    """Hydrogen wave function from single applications at the requested orders."""
    with precision.context():
        problem = get_problem("hydrogen", precision)
        grid = uniform_grid(t_lo, t_hi, points, precision)
        sweep = uniform_convergence_sweep(problem, orders, grid, kernel, jobs)
        rows = [[t, sweep.exact[i]] + [sweep.values[o][i] for o in orders] for i, t in enumerate(grid)]
        cols = ["t", "exact"] + [f"mpe_{o}" for o in orders]
        return csv_lines(cols, rows, precision, {"problem": "hydrogen", "kernel": sweep.kernel,
                                                  "scheme": "single-application",
                                                  "t_start": precision.format(problem.t_start)})


def figure3_data(orders: Sequence[int], points: int = DEFAULT_GRID_POINTS, t_lo="0.1", t_hi=5,
                 extended: Precision = EXTENDED, jobs: int = 1) -> list[str]:
    """Long-format round-off table: t, order, double error, extended error."""
    grid = uniform_grid(t_lo, t_hi, points, extended)
    table = roundoff_study("hydrogen", orders, [str(t) for t in grid], (DOUBLE, extended), jobs=jobs)
    rows = []
    with extended.context():
        for o in orders:
            for i, t in enumerate(grid):
                rows.append([t, o, table.double.errors[o][i], table.extended.errors[o][i]])
        return csv_lines(["t", "order", "double_error", "extended_error"], rows, extended,
                         {"problem": "hydrogen", "kernel": table.double.kernel, "scheme": "single-application",
                          "onset": table.onset if table.onset is not None else "none"})
