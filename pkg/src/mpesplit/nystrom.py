"""Explicit Nystrom integrators for q'' = a(q, t) and force-evaluation accounting.

Each explicit step is the closed-form reduction of a multi-product
splitting with A = drift and B = kick; :func:`hamiltonian_system` gives the
same problem as a :class:`~mpesplit.kernels.SplitSystem` so the reductions
can be checked against the generic engine.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import ClockedState, KernelKind, SplitSystem, apply_kernel, strang_step, t1_step
from .mpe import MpeScheme, StepBudget, kernel_applications, mpe_step
from .numerics import weighted_sum


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def as_clocked(self) -> ClockedState:
        return ClockedState(np.stack([np.asarray(self.q), np.asarray(self.v)]), self.t)

    @classmethod
    def from_clocked(cls, cs: ClockedState) -> "PhaseState":
        return cls(cs.state[0], cs.state[1], cs.t)


def _key(x):
    if isinstance(x, np.ndarray):
        return (x.shape, x.tobytes()) if x.dtype != object else (x.shape, tuple(x.flat))
    return x


class ForceField:
    """Acceleration a(q, t) with an evaluation counter.

    A call whose (q, t) equals the previous call, or equals a pinned shared
    argument, reuses the stored value and is not counted.  ``calls`` counts
    every request; ``evaluations`` counts actual evaluations.
    """

    def __init__(self, accel: Callable, *, time_dependent: bool = False):
        self.accel = accel
        self.time_dependent = time_dependent
        self.reset()

    def reset(self) -> None:
        self.calls = 0
        self.evaluations = 0
        self.arguments: list[tuple] = []
        self._last = None
        self._shared: dict = {}

    def share(self, q, t) -> None:
        """Keep a(q, t) for reuse by every later request with the same argument."""
        self._shared[(_key(q), _key(t))] = None

    def __call__(self, q, t=0.0):
        self.calls += 1
        key = (_key(q), _key(t))
        if self._last is not None and self._last[0] == key:
            return self._last[1]
        if self._shared.get(key) is not None:
            return self._shared[key]
        val = self.accel(q, t)
        self.evaluations += 1
        self.arguments.append((q, t))
        self._last = (key, val)
        if key in self._shared:
            self._shared[key] = val
        return val


def hamiltonian_system(force: Callable, name: str = "hamiltonian") -> SplitSystem:
    """State layout: ``state[0]`` = q, ``state[1]`` = v (any trailing shape)."""

    def drift(s, t, h):
        return np.stack([s[0] + h * s[1], s[1]])

    def kick(s, t, h):
        return np.stack([s[0], s[1] + h * force(s[0], t)])

    return SplitSystem(drift, kick, time_dependent=getattr(force, "time_dependent", True), name=name)


def verlet_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    a0 = F(q0, t)
    q = q0 + h * v0 + h * h / 2 * a0
    v = v0 + h / 2 * (a0 + F(q, t + h))
    return PhaseState(q, v, t + h)


def rk2_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    a0 = F(q0, t)
    q = q0 + h * v0 + h * h / 2 * a0
    v = v0 + h / 2 * (a0 + F(q0 + h * v0, t + h))
    return PhaseState(q, v, t + h)


def kutta3_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    a0 = F(q0, t)
    am = F(q0 + h / 2 * v0, t + h / 2)
    q = q0 + h * v0 + h * h / 6 * (a0 + 2 * am)
    v = v0 + h / 6 * (a0 + 4 * am + F(q0 + h * v0 + h * h * a0, t + h))
    return PhaseState(q, v, t + h)


def nystrom3_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    a0 = F(q0, t)
    a23 = F(q0 + 2 * h / 3 * v0 + 2 * h * h / 9 * a0, t + 2 * h / 3)
    q = q0 + h * v0 + h * h / 4 * (a0 + a23)
    v = v0 + h / 4 * (a0 + 3 * a23)
    return PhaseState(q, v, t + h)


def ba3_step(F, s: PhaseState, h) -> PhaseState:
    """Third order with two forces, neither at the starting position."""
    q0, v0, t = s.q, s.v, s.t
    a13 = F(q0 + h / 3 * v0, t + h / 3)
    q = q0 + h * v0 + h * h / 2 * a13
    v = v0 + h / 4 * (3 * a13 + F(q0 + h * v0 + 2 * h * h / 3 * a13, t + h))
    return PhaseState(q, v, t + h)


def nystrom5_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    hh = h * h
    a0 = F(q0, t)
    a25 = F(q0 + 2 * h / 5 * v0 + 2 * hh / 25 * a0, t + 2 * h / 5)
    a23 = F(q0 + 2 * h / 3 * v0 + 2 * hh / 9 * a0, t + 2 * h / 3)
    a45 = F(q0 + 4 * h / 5 * v0 + 4 * hh / 25 * (a0 + a25), t + 4 * h / 5)
    q = q0 + h * v0 + hh / 192 * (23 * a0 + 75 * a25 - 27 * a23 + 25 * a45)
    v = v0 + h / 192 * (23 * a0 + 125 * a25 - 81 * a23 + 125 * a45)
    return PhaseState(q, v, t + h)


def nystrom7_step(F, s: PhaseState, h) -> PhaseState:
    q0, v0, t = s.q, s.v, s.t
    hh = h * h
    a0 = F(q0, t)
    a23 = F(q0 + 2 * h / 3 * v0 + 2 * hh / 9 * a0, t + 2 * h / 3)
    a25 = F(q0 + 2 * h / 5 * v0 + 2 * hh / 25 * a0, t + 2 * h / 5)
    a45 = F(q0 + 4 * h / 5 * v0 + 4 * hh / 25 * (a0 + a25), t + 4 * h / 5)
    a27 = F(q0 + 2 * h / 7 * v0 + 2 * hh / 49 * a0, t + 2 * h / 7)
    a47 = F(q0 + 4 * h / 7 * v0 + 4 * hh / 49 * (a0 + a27), t + 4 * h / 7)
    a67 = F(q0 + 6 * h / 7 * v0 + 2 * hh / 49 * (3 * a0 + 4 * a27 + 2 * a47), t + 6 * h / 7)
    q = q0 + h * v0 + hh / 23040 * (
        1682 * a0 + 729 * a23 - 3125 * (3 * a25 + a45) + 2401 * (5 * a27 + 3 * a47 + a67))
    # a23 weight is 2187 = 23040 * (729/5120) * (2/3); the weights must sum to 23040
    v = v0 + h / 23040 * (
        1682 * a0 + 2187 * a23 - 15625 * (a25 + a45) + 16807 * (a27 + a47 + a67))
    return PhaseState(q, v, t + h)


METHODS = {
    "verlet": verlet_step,
    "rk2": rk2_step,
    "kutta3": kutta3_step,
    "nystrom3": nystrom3_step,
    "ba3": ba3_step,
    "nystrom5": nystrom5_step,
    "nystrom7": nystrom7_step,
}

#: force evaluations per step for each explicit method
FORCE_COUNTS = {"verlet": 2, "rk2": 2, "kutta3": 3, "nystrom3": 2, "ba3": 2, "nystrom5": 4, "nystrom7": 7}


# Unconsolidated products, kept as oracles for the consolidated closed forms.

def t1_reversed_step(sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """e^{hB} e^{hA}: drift first, then kick at the advanced clock."""
    s = sys.flow_a(cs.state, cs.t, h)
    return ClockedState(sys.flow_b(s, cs.t + h, h), cs.t + h)


def dunn_step(sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """4/3 (S_AB + S_BA)/2 - 1/3 S with S = (e^{hA}e^{hB} + e^{hB}e^{hA})/2."""
    terms = [strang_step(sys, cs, h, "AB").state, strang_step(sys, cs, h, "BA").state,
             t1_step(sys, cs, h).state, t1_reversed_step(sys, cs, h).state]
    return ClockedState(weighted_sum([2 / 3, 2 / 3, -1 / 6, -1 / 6], terms), cs.t + h)


def swapped(sys: SplitSystem) -> SplitSystem:
    """Exchange the roles of A and B (autonomous systems only)."""
    return SplitSystem(sys.flow_b, sys.flow_a, name=f"{sys.name}-swapped")


def burstein_mirin_ba_step(sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """9/8 e^{hB/3} e^{2hA/3} e^{2hB/3} e^{hA/3} - 1/8 e^{hB} e^{hA}."""
    sw = swapped(sys)
    u2 = apply_kernel(sw, KernelKind.ODD_BASIS, cs, h, 2).state
    u1 = apply_kernel(sw, KernelKind.ODD_BASIS, cs, h, 1).state
    return ClockedState(weighted_sum([-1 / 8, 9 / 8], [u1, u2]), cs.t + h)


def force_budget(scheme: MpeScheme, accel: Callable | None = None, state: PhaseState | None = None,
                 h: float = 0.1) -> StepBudget:
    """Measure force evaluations for one step of ``scheme``.

    ``raw_force_evaluations`` reuses a force only between consecutive kicks
    at the same (q, t); ``force_evaluations`` additionally shares the force
    at the common starting point across all branches.
    """
    accel = accel or anharmonic_accel
    if state is None:
        state = PhaseState(np.array([0.3, -0.2]), np.array([0.5, 0.1]), 0.0)
    F = ForceField(accel)
    mpe_step(scheme, hamiltonian_system(F), state.as_clocked(), h)
    raw = F.evaluations
    F.reset()
    F.share(np.asarray(state.q), state.t)
    mpe_step(scheme, hamiltonian_system(F), state.as_clocked(), h)
    return StepBudget(kernel_applications(scheme), F.evaluations, raw)


def anharmonic_accel(q, t=0.0):
    """Smooth non-linear test force: a = -q - 0.5 q |q|^2 plus a weak coupling."""
    q = np.asarray(q)
    r2 = np.sum(q * q)
    return -q - 0.5 * r2 * q + 0.1 * np.roll(q, 1)
