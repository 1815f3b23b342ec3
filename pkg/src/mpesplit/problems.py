"""Verification problems with exact solutions, and Magnus-expansion baselines.

* ``matrix2x2``  Y' = [[2, t], [0, -1]] Y, Y(0) = I
* ``hydrogen``   q'' = (1 - 2/t) q, exact q = t e^{-t}  (singular at t = 0)
* ``oscillator`` q'' = (t^2 - 3) q, exact q = t e^{-t^2/2}

The radial problems use the state [q, p] and may be batched: a state of
shape (2, N) with clocks and widths of shape (N,) advances N independent
runs at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import mpmath
import numpy as np

from .kernels import ClockedState, KernelKind, SplitSystem
from .numerics import DOUBLE, Precision, expm


class SingularityError(ArithmeticError):
    """A coefficient was evaluated at its singular point."""


@dataclass(frozen=True)
class LinearSystem:
    """Generator A(t) of Y' = A(t) Y, optionally split as T + V(t)."""

    a_of_t: Callable[[Any], np.ndarray]
    t_part: Optional[np.ndarray] = None
    v_part: Optional[Callable[[Any], np.ndarray]] = None


@dataclass(frozen=True)
class Problem:
    name: str
    system: SplitSystem
    precision: Precision
    exact: Optional[Callable[[Any], np.ndarray]] = None
    t_start: Any = 0
    initial_state: Any = None
    domain: tuple = (0.0, float("inf"))
    default_kernel: KernelKind = KernelKind.STRANG_BA
    linear: Optional[LinearSystem] = None
    accel: Optional[Callable] = None  # a(q, t) for the Nystrom reading
    batchable: bool = False
    options: dict = field(default_factory=dict)

    @property
    def t_start_offset(self):
        return self.t_start

    def start(self) -> ClockedState:
        return ClockedState(self.initial_state, self.t_start)


def _expm1(prec: Precision, x):
    return mpmath.expm1(x) if prec.is_extended else np.expm1(x)


# ---------------------------------------------------------------------------
# 2x2 upper-triangular problem


def matrix2x2_problem(precision: Precision = DOUBLE, split: str = "clock", exp_method: str = "analytic") -> Problem:
    """A(t) = [[2, t], [0, -1]].

    ``split="clock"``: A-flow is the bare clock advance, B-flow the frozen
    exponential exp(h A(t)).  ``split="tv"``: T = diag(2, -1) against the
    nilpotent V(t) = [[0, t], [0, 0]].
    """
    prec = precision
    one, zero = prec.real(1), prec.real(0)

    def a_of_t(t):
        return prec.array([[2, 0], [0, -1]]) + prec.array([[zero, t], [zero, zero]])

    def frozen_exp(t, h):
        if exp_method == "expm":
            return expm(a_of_t(t), h)
        e2, em = prec.exp(2 * h), prec.exp(-h)
        upper = t * (_expm1(prec, 2 * h) - _expm1(prec, -h)) / 3
        return prec.array([[e2, upper], [zero, em]])

    def full_exp(y, t, h):
        return frozen_exp(t, h) @ y

    def v_part(t):
        return prec.array([[zero, t], [zero, zero]])

    t_part = prec.array([[2, 0], [0, -1]])

    if split == "clock":
        system = SplitSystem(lambda y, t, h: y, full_exp, full_exp, True, 2, "matrix2x2")
    elif split == "tv":
        def flow_t(y, t, h):
            return prec.array([[prec.exp(2 * h), zero], [zero, prec.exp(-h)]]) @ y

        def flow_v(y, t, h):
            return (prec.eye(2) + h * v_part(t)) @ y

        system = SplitSystem(flow_t, flow_v, full_exp, True, 2, "matrix2x2-tv")
    else:
        raise ValueError(f"unknown split {split!r}")

    def exact(t):
        return prec.array([[prec.exp(2 * t), exact_f(t, prec)], [zero, prec.exp(-t)]])

    return Problem(
        name="matrix2x2",
        system=system,
        precision=prec,
        exact=exact,
        t_start=zero,
        initial_state=prec.eye(2),
        domain=(0.0, float("inf")),
        default_kernel=KernelKind.FROZEN_MIDPOINT,
        linear=LinearSystem(a_of_t, t_part, v_part),
        options={"split": split, "exp_method": exp_method},
    )


def exact_f(t, prec: Precision = DOUBLE):
    """Upper-right entry of the exact solution, e^{-t}(e^{3t} - 1 - 3t)/9."""
    return prec.exp(-t) * (_expm1(prec, 3 * t) - 3 * t) / 9


_F_SERIES = {  # power of t in the bracket -> (order at which it enters, coefficient)
    0: (2, (1, 6)),
    1: (4, (-1, 12)),
    3: (6, (1, 80)),
    5: (8, (-3, 1120)),
    7: (10, (27, 44800)),
}


def magnus_f_series(t, order: int, precision: Precision = DOUBLE):
    """Upper-right entry from the Magnus series truncated at ``order`` (4, 6, 8 or 10).

    The series has radius of convergence 2*pi/3 in t.
    """
    if order not in (4, 6, 8, 10):
        raise ValueError(f"Magnus series available for orders 4, 6, 8, 10; got {order}")
    prec = precision
    bracket = sum(prec.real(num) / den * t**p for p, (enters, (num, den)) in _F_SERIES.items() if enters <= order)
    return t * prec.exp(-t) * _expm1(prec, 3 * t) * bracket


# ---------------------------------------------------------------------------
# radial problems q'' = f(t) q


def _radial(name, f, exact_q, exact_p, prec: Precision, t_start, regularize: bool,
            singular: bool = True) -> Problem:
    zero = prec.real(0)

    def accel(q, t):
        if singular and np.any(np.asarray(t) == 0):
            raise SingularityError(f"{name}: coefficient evaluated at t = 0")
        return f(t) * q

    def drift(s, t, h):
        return np.stack([s[0] + h * s[1], s[1]])

    def kick(s, t, h):
        at_zero = np.asarray(t) == 0
        if singular and np.any(at_zero):
            if not regularize:
                raise SingularityError(f"{name}: kick evaluated at t = 0; start at an offset or regularize")
            if np.any(np.asarray(s[0])[at_zero] != 0):
                raise SingularityError(f"{name}: regularized first kick needs q = 0")
            # f(t) q(t) -> -2 p as t -> 0 with q(0) = 0
            safe_t = np.where(at_zero, 1, t) if np.ndim(t) else (1 if at_zero else t)
            a = np.where(at_zero, -2 * s[1], f(safe_t) * s[0]) if np.ndim(t) else -2 * s[1]
        else:
            a = f(t) * s[0]
        return np.stack([s[0], s[1] + h * a])

    def a_of_t(t):
        return prec.array([[zero, 1], [f(t), zero]])

    def full_exp(s, t, h):
        if np.ndim(t):
            cols = [expm(a_of_t(ti), hi) @ s[:, i] for i, (ti, hi) in enumerate(np.broadcast(t, h))]
            return np.stack(cols, axis=1)
        return expm(a_of_t(t), h) @ s

    def exact(t):
        return np.stack([exact_q(t), exact_p(t)])

    t_start = prec.real(t_start)
    init = prec.array([0, 1]) if t_start == 0 else exact(t_start)
    return Problem(
        name=name,
        system=SplitSystem(drift, kick, full_exp, True, 2, name),
        precision=prec,
        exact=exact,
        t_start=t_start,
        initial_state=init,
        default_kernel=KernelKind.STRANG_BA,
        linear=LinearSystem(a_of_t, prec.array([[0, 1], [0, 0]]), lambda t: prec.array([[zero, zero], [f(t), zero]])),
        accel=accel,
        batchable=True,
        options={"regularize": regularize},
    )


HYDROGEN_OFFSET = "1e-6"


def hydrogen_problem(precision: Precision = DOUBLE, start: str = "offset", offset=HYDROGEN_OFFSET) -> Problem:
    """Hydrogen ground state, f(t) = 1 - 2/t.

    ``start="offset"`` begins at t = 1e-6 from the exact state there.
    ``start="regularized"`` begins at t = 0 with q = 0, p = 1 and replaces a
    kick at t = 0 by its limit f(t) q(t) -> -2 p.
    """
    prec = precision
    if start not in ("offset", "regularized"):
        raise ValueError(f"unknown start {start!r}")

    def f(t):
        return 1 - 2 / t

    t0 = offset if start == "offset" else 0
    return _radial(
        "hydrogen", f,
        lambda t: t * prec.exp(-t),
        lambda t: (1 - t) * prec.exp(-t),
        prec, t0, regularize=(start == "regularized"),
    )


def radial_oscillator_problem(precision: Precision = DOUBLE) -> Problem:
    """f(t) = t^2 - 3, exact q = t e^{-t^2/2}."""
    prec = precision

    def f(t):
        return t * t - 3

    return _radial(
        "oscillator", f,
        lambda t: t * prec.exp(-t * t / 2),
        lambda t: (1 - t * t) * prec.exp(-t * t / 2),
        prec, 0, regularize=False, singular=False,
    )


PROBLEMS = {
    "matrix2x2": matrix2x2_problem,
    "hydrogen": hydrogen_problem,
    "oscillator": radial_oscillator_problem,
}


def get_problem(name: str, precision: Precision = DOUBLE, **kwargs) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; expected one of {sorted(PROBLEMS)}") from None
    return factory(precision, **kwargs)


# ---------------------------------------------------------------------------
# Magnus baselines


def magnus_constants(prec: Precision = DOUBLE):
    r3 = prec.sqrt(3)
    return prec.real(1) / 2 - r3 / 6, prec.real(1) / 2 + r3 / 6, r3 / 12


def magnus2_step(lin: LinearSystem, cs: ClockedState, h) -> ClockedState:
    """exp(h A(t + h/2)), the second-order Magnus operator."""
    return ClockedState(expm(lin.a_of_t(cs.t + h / 2), h) @ cs.state, cs.t + h)


def magnus4_step(lin: LinearSystem, cs: ClockedState, h, factorized: bool | None = None) -> ClockedState:
    """Fourth-order Magnus step.

    With a T + V split (and commuting V values) the exponential of
    Omega^[4] is applied as e^{c3 h dV} e^{h(T + (V1+V2)/2)} e^{-c3 h dV};
    otherwise exp(h (A1 + A2)/2 - c3 h^2 [A1, A2]) is used.
    """
    from .numerics import precision_of

    prec = precision_of(cs.state)
    c1, c2, c3 = magnus_constants(prec)
    t = cs.t
    if factorized is None:
        factorized = lin.t_part is not None and lin.v_part is not None
    if factorized:
        v1, v2 = lin.v_part(t + c1 * h), lin.v_part(t + c2 * h)
        dv = v2 - v1
        s = expm(dv, -c3 * h) @ cs.state
        s = expm(lin.t_part + (v1 + v2) / 2, h) @ s
        s = expm(dv, c3 * h) @ s
    else:
        a1, a2 = lin.a_of_t(t + c1 * h), lin.a_of_t(t + c2 * h)
        omega = h / 2 * (a1 + a2) - c3 * h * h * (a1 @ a2 - a2 @ a1)
        s = expm(omega) @ cs.state
    return ClockedState(s, t + h)
