"""Exponential-product kernels with an explicit evaluation clock.

A :class:`SplitSystem` supplies two exactly solvable flows.  ``flow_a`` is
the stage that carries the forward time derivative: it advances the clock
by its width.  ``flow_b`` is evaluated at the current clock and leaves it
unchanged.  For a Hamiltonian ``A`` is the drift (q += h v) and ``B`` the
kick (v += h a(q, t)); for a linear system ``Y' = A(t) Y`` split against
the time derivative alone, ``A`` is the identity and ``B`` is the frozen
exponential ``exp(h A(t))``.

Products are written right to left and applied right to left, so
``strang_step(..., AB)`` is ``e^{h/2 B} e^{h A} e^{h/2 B}`` (kick-drift-kick)
and ``BA`` is drift-kick-drift with the kick at the midpoint clock.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Callable, Iterator, Optional

import numpy as np

State = Any  # numpy array, any shape; must support + and scalar *
Flow = Callable[[State, Any, Any], State]


class CapabilityError(RuntimeError):
    """The system lacks a flow the requested kernel needs."""


class KernelKind(enum.Enum):
    T1 = "t1"
    STRANG_AB = "ab"
    STRANG_BA = "ba"
    FROZEN_MIDPOINT = "midpoint"
    ODD_BASIS = "odd"

    @property
    def symmetric(self) -> bool:
        return self in (KernelKind.STRANG_AB, KernelKind.STRANG_BA, KernelKind.FROZEN_MIDPOINT)


@dataclass(frozen=True)
class SplitSystem:
    flow_a: Flow
    flow_b: Flow
    full_exp: Optional[Flow] = None
    time_dependent: bool = False
    dim: int | None = None
    name: str = ""


@dataclass(frozen=True)
class ClockedState:
    state: State
    t: Any

    def with_state(self, state) -> "ClockedState":
        return replace(self, state=state)


def _is_zero(h) -> bool:
    return np.ndim(h) == 0 and h == 0


def t1_step(sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """e^{hA} e^{hB(t)}: B first at the start clock."""
    if _is_zero(h):
        return cs
    s = sys.flow_b(cs.state, cs.t, h)
    s = sys.flow_a(s, cs.t, h)
    return ClockedState(s, cs.t + h)


def strang_step(sys: SplitSystem, cs: ClockedState, h, orientation: str = "AB") -> ClockedState:
    if _is_zero(h):
        return cs
    t = cs.t
    half = h / 2
    if orientation == "AB":
        s = sys.flow_b(cs.state, t, half)
        s = sys.flow_a(s, t, h)
        s = sys.flow_b(s, t + h, half)
    elif orientation == "BA":
        s = sys.flow_a(cs.state, t, half)
        s = sys.flow_b(s, t + half, h)
        s = sys.flow_a(s, t + half, half)
    else:
        raise ValueError(f"orientation must be 'AB' or 'BA', got {orientation!r}")
    return ClockedState(s, t + h)


def frozen_midpoint_step(sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """exp(h A(t + h/2)) applied through the system's full exponential."""
    if sys.full_exp is None:
        raise CapabilityError(f"system {sys.name or '?'} has no full exponential flow")
    if _is_zero(h):
        return cs
    return ClockedState(sys.full_exp(cs.state, cs.t + h / 2, h), cs.t + h)


def u_basis_step(sys: SplitSystem, cs: ClockedState, h, n: int) -> ClockedState:
    """Odd basis member U_n(h) = e^{hA/x} (e^{2hB/x} e^{2hA/x})^{n-1} e^{hB/x}, x = 2n-1.

    B stages are evaluated at clocks t, t + 2h/x, t + 4h/x, ...
    """
    if n < 1:
        raise ValueError("odd basis index must be >= 1")
    if _is_zero(h):
        return cs
    x = 2 * n - 1
    t = cs.t
    w = h / x
    s = sys.flow_b(cs.state, t, w)
    for j in range(1, n):
        s = sys.flow_a(s, t + (2 * j - 2) * w, 2 * w)
        s = sys.flow_b(s, t + 2 * j * w, 2 * w)
    s = sys.flow_a(s, t + (2 * n - 2) * w, w)
    return ClockedState(s, t + h)


def apply_kernel(sys: SplitSystem, kind: KernelKind, cs: ClockedState, h, index: int = 1) -> ClockedState:
    if kind is KernelKind.T1:
        return t1_step(sys, cs, h)
    if kind is KernelKind.STRANG_AB:
        return strang_step(sys, cs, h, "AB")
    if kind is KernelKind.STRANG_BA:
        return strang_step(sys, cs, h, "BA")
    if kind is KernelKind.FROZEN_MIDPOINT:
        return frozen_midpoint_step(sys, cs, h)
    if kind is KernelKind.ODD_BASIS:
        return u_basis_step(sys, cs, h, index)
    raise ValueError(f"unknown kernel {kind!r}")


def iter_compose(sys: SplitSystem, kind: KernelKind, cs: ClockedState, h, k: int,
                 index: int = 1) -> Iterator[ClockedState]:
    """Yield the state after each of ``k`` kernel applications of width h/k.

    Substep j starts at clock t + j*h/k; the last state carries clock t + h.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    t0 = cs.t
    w = h / k
    cur = cs
    for j in range(k):
        start = ClockedState(cur.state, t0 if j == 0 else t0 + j * w)
        cur = apply_kernel(sys, kind, start, w, index)
        if j == k - 1:
            cur = ClockedState(cur.state, t0 + h)
        yield cur


def compose_k(sys: SplitSystem, kind: KernelKind, cs: ClockedState, h, k: int,
              index: int = 1) -> ClockedState:
    out = cs
    for out in iter_compose(sys, kind, cs, h, k, index):
        pass
    return out
