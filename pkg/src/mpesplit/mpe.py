"""Multi-product expansion schemes: weighted sums of kernel powers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .coefficients import (
    WeightSet,
    closed_form_weights,
    even_sequence,
    final_correction_sequence,
    odd_sequence,
)
from .kernels import ClockedState, KernelKind, SplitSystem, apply_kernel, compose_k, iter_compose
from .numerics import precision_of, rational_to_real, weighted_sum

EVEN_KERNELS = (KernelKind.STRANG_AB, KernelKind.STRANG_BA, KernelKind.FROZEN_MIDPOINT)


class BranchError(RuntimeError):
    """A kernel failed inside one branch of a multi-product step."""

    def __init__(self, index: int, k: int, cause: Exception):
        super().__init__(f"branch {index} (k={k}) failed: {cause}")
        self.index = index
        self.k = k


class StepError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step} failed: {cause}")
        self.step = step


@dataclass(frozen=True)
class MpeScheme:
    kernel: KernelKind
    nodes: WeightSet
    nominal_order: int
    final_m: int | None = None  # None: per-step mode

    @property
    def mode(self) -> str:
        return "per-step" if self.final_m is None else f"final-correction({self.final_m})"

    def describe(self) -> str:
        ks = "-".join(str(k) for k in self.nodes.ks)
        return f"{self.kernel.value}:order{self.nominal_order}:ks{ks}:{self.mode}"


@dataclass(frozen=True)
class StepBudget:
    kernel_applications: int
    force_evaluations: int | None = None  # with the initial force shared across branches
    raw_force_evaluations: int | None = None


def build_even(n: int, kernel: KernelKind = KernelKind.STRANG_BA) -> MpeScheme:
    if n < 1:
        raise ValueError("n must be >= 1")
    if kernel not in EVEN_KERNELS:
        raise ValueError(f"even schemes need a symmetric kernel, got {kernel.value}")
    return MpeScheme(kernel, closed_form_weights(even_sequence(n)), 2 * n)


def build_odd(n: int) -> MpeScheme:
    if n < 1:
        raise ValueError("n must be >= 1")
    return MpeScheme(KernelKind.ODD_BASIS, closed_form_weights(odd_sequence(n)), 2 * n - 1)


def build_final_correction(m: int, n: int, kernel: KernelKind = KernelKind.STRANG_BA) -> MpeScheme:
    if kernel not in EVEN_KERNELS:
        raise ValueError(f"final correction needs a symmetric kernel, got {kernel.value}")
    nodes = closed_form_weights(final_correction_sequence(m, n))
    return MpeScheme(kernel, nodes, 2 * n, final_m=m)


def build_custom(ks: Sequence[int], kernel: KernelKind) -> MpeScheme:
    """Any node set.  With the odd basis, node k selects U_{(k+1)/2}."""
    nodes = closed_form_weights(ks)
    if kernel is KernelKind.ODD_BASIS:
        if any(k % 2 == 0 for k in nodes.ks):
            raise ValueError("odd-basis schemes need odd nodes")
        return MpeScheme(kernel, nodes, 2 * len(nodes) - 1)
    if kernel not in EVEN_KERNELS:
        raise ValueError(f"cannot extrapolate the {kernel.value} kernel")
    return MpeScheme(kernel, nodes, 2 * len(nodes))


def real_weights(scheme: MpeScheme, like) -> list:
    prec = precision_of(like)
    return [rational_to_real(c, prec) for c in scheme.nodes.cs]


def branch(scheme: MpeScheme, sys: SplitSystem, cs: ClockedState, h, k: int) -> ClockedState:
    if scheme.kernel is KernelKind.ODD_BASIS:
        return apply_kernel(sys, KernelKind.ODD_BASIS, cs, h, (k + 1) // 2)
    return compose_k(sys, scheme.kernel, cs, h, k)


def combine(scheme: MpeScheme, branches: dict[int, ClockedState], cs: ClockedState, h) -> ClockedState:
    """Weighted sum of branch end states, accumulated in ascending k."""
    nodes = scheme.nodes.sorted()
    terms = [branches[k].state for k in nodes.ks]
    ws = [rational_to_real(c, precision_of(terms[0])) for c in nodes.cs]
    return ClockedState(weighted_sum(ws, terms), cs.t + h)


def mpe_step(scheme: MpeScheme, sys: SplitSystem, cs: ClockedState, h) -> ClockedState:
    """One multi-product step; every branch starts from the same state and clock."""
    branches = {}
    for i, k in enumerate(sorted(scheme.nodes.ks)):
        try:
            branches[k] = branch(scheme, sys, cs, h, k)
        except Exception as exc:
            raise BranchError(i, k, exc) from exc
    return combine(scheme, branches, cs, h)


def kernel_applications(scheme: MpeScheme) -> int:
    if scheme.kernel is KernelKind.ODD_BASIS:
        return len(scheme.nodes)
    return sum(scheme.nodes.ks)


def integrate(scheme: MpeScheme, sys: SplitSystem, state0, t0, t1, steps: int) -> list[ClockedState]:
    """Trajectory from t0 to t1 in ``steps`` equal steps, initial state included.

    In final-correction mode each step runs the m-substep second-order
    trajectory (all substates are recorded) and only the step's end state
    is replaced by the extrapolated combination.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t1 == t0:
        raise ValueError("t1 must differ from t0")
    h = (t1 - t0) / steps
    cur = ClockedState(state0, t0)
    traj = [cur]
    for step in range(steps):
        start = ClockedState(cur.state, t0 + step * h) if step else cur
        try:
            if scheme.final_m is None:
                cur = mpe_step(scheme, sys, start, h)
                traj.append(cur)
            else:
                cur = _final_correction_step(scheme, sys, start, h, traj)
        except Exception as exc:
            raise StepError(step, exc) from exc
    traj[-1] = ClockedState(traj[-1].state, t1)
    return traj


def _final_correction_step(scheme, sys, cs, h, traj) -> ClockedState:
    m = scheme.final_m
    fine = list(iter_compose(sys, scheme.kernel, cs, h, m))
    traj.extend(fine[:-1])
    branches = {m: fine[-1]}
    for k in scheme.nodes.ks:
        if k != m:
            branches[k] = compose_k(sys, scheme.kernel, cs, h, k)
    out = combine(scheme, branches, cs, h)
    traj.append(out)
    return out
