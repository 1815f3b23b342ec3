import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpesplit.kernels import (CapabilityError, ClockedState, KernelKind, SplitSystem, apply_kernel, compose_k,
                              iter_compose, strang_step, u_basis_step)
from mpesplit.nystrom import hamiltonian_system


def linear_system(a, b):
    """Constant-matrix split with exact flows."""
    from mpesplit.numerics import expm
    return SplitSystem(lambda y, t, h: expm(a, h) @ y, lambda y, t, h: expm(b, h) @ y,
                       lambda y, t, h: expm(a + b, h) @ y, False, a.shape[0], "linear")


def pendulum():
    return hamiltonian_system(lambda q, t: -np.sin(q))


def recorder():
    log = []

    def drift(s, t, h):
        log.append(("A", t, h))
        return s

    def kick(s, t, h):
        log.append(("B", t, h))
        return s
    return SplitSystem(drift, kick, lambda s, t, h: (log.append(("E", t, h)), s)[1], True), log


@pytest.mark.parametrize("orientation", ["AB", "BA"])
@given(h=st.floats(0.01, 0.8), q=st.floats(-2, 2), v=st.floats(-2, 2))
def test_strang_time_reversible(orientation, h, q, v):
    sys = pendulum()
    cs = ClockedState(np.array([q, v]), 0.0)
    fwd = strang_step(sys, cs, h, orientation)
    back = strang_step(sys, fwd, -h, orientation)
    assert np.max(np.abs(back.state - cs.state)) <= 50 * np.finfo(float).eps * max(1, np.max(np.abs(cs.state)))


def test_t1_not_reversible():
    sys = pendulum()
    cs = ClockedState(np.array([1.0, 0.5]), 0.0)
    back = apply_kernel(sys, KernelKind.T1, apply_kernel(sys, KernelKind.T1, cs, 0.3), -0.3)
    assert np.max(np.abs(back.state - cs.state)) > 1e-4


@pytest.mark.parametrize("n", [2, 3])
def test_odd_basis_reversal_defect_is_second_order(n):
    sys = pendulum()
    cs = ClockedState(np.array([1.0, 0.5]), 0.0)
    hs = [0.2, 0.1, 0.05, 0.025]
    errs = []
    for h in hs:
        back = u_basis_step(sys, u_basis_step(sys, cs, h, n), -h, n)
        errs.append(np.max(np.abs(back.state - cs.state)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - 2) < 0.3


def test_strang_clock_placement():
    sys, log = recorder()
    strang_step(sys, ClockedState(0, 1.0), 0.5, "AB")
    assert log == [("B", 1.0, 0.25), ("A", 1.0, 0.5), ("B", 1.5, 0.25)]
    log.clear()
    strang_step(sys, ClockedState(0, 1.0), 0.5, "BA")
    assert log == [("A", 1.0, 0.25), ("B", 1.25, 0.5), ("A", 1.25, 0.25)]


def test_midpoint_clock_and_capability():
    sys, log = recorder()
    out = apply_kernel(sys, KernelKind.FROZEN_MIDPOINT, ClockedState(0, 2.0), 1.0)
    assert log == [("E", 2.5, 1.0)] and out.t == 3.0
    bare = SplitSystem(lambda s, t, h: s, lambda s, t, h: s)
    with pytest.raises(CapabilityError):
        apply_kernel(bare, KernelKind.FROZEN_MIDPOINT, ClockedState(0, 0.0), 1.0)


@given(n=st.integers(1, 6), h=st.fractions(1, 10))
def test_odd_basis_kick_clocks(n, h):
    sys, log = recorder()
    u_basis_step(sys, ClockedState(0, 0), h, n)
    x = 2 * n - 1
    kicks = [e for e in log if e[0] == "B"]
    assert [k[1] for k in kicks] == [2 * j * h / x for j in range(n)]
    assert [k[2] for k in kicks] == [h / x] + [2 * h / x] * (n - 1)
    assert sum(e[2] for e in log if e[0] == "A") == h


@given(k=st.integers(1, 9), h=st.fractions(1, 5))
def test_composition_clock_is_exact(k, h):
    sys, log = recorder()
    states = list(iter_compose(sys, KernelKind.STRANG_BA, ClockedState(0, 0), h, k))
    assert states[-1].t == h
    assert [s.t for s in states] == [h * (j + 1) / k for j in range(k)]


def test_zero_width_returns_input():
    sys = pendulum()
    cs = ClockedState(np.array([1.0, 2.0]), 0.3)
    for kind in KernelKind:
        if kind is KernelKind.FROZEN_MIDPOINT:
            continue
        assert apply_kernel(sys, kind, cs, 0.0) is cs


def test_commuting_flows_exact():
    a, b = np.diag([0.7, -0.2]), np.diag([-1.1, 0.4])
    sys = linear_system(a, b)
    y0 = np.array([1.0, -2.0])
    for kind in KernelKind:
        for h in (0.1, 1.0):
            out = apply_kernel(sys, kind, ClockedState(y0, 0.0), h, 2)
            ref = np.exp(np.diag(a + b) * h) * y0
            assert np.allclose(out.state, ref, rtol=200 * np.finfo(float).eps, atol=0)


def test_strang_local_error_third_order():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [-1.0, 0.0]])
    sys = linear_system(a, b)
    y0 = np.array([1.0, 0.0])
    hs = [0.2, 0.1, 0.05]
    for kind in (KernelKind.STRANG_AB, KernelKind.STRANG_BA):
        errs = [np.max(np.abs(apply_kernel(sys, kind, ClockedState(y0, 0.0), h).state
                              - np.array([math.cos(h), -math.sin(h)]))) for h in hs]
        assert abs(np.polyfit(np.log(hs), np.log(errs), 1)[0] - 3) < 0.2


def test_compose_k_rejects_zero():
    with pytest.raises(ValueError):
        compose_k(pendulum(), KernelKind.STRANG_AB, ClockedState(np.zeros(2), 0.0), 0.1, 0)
    with pytest.raises(ValueError):
        strang_step(pendulum(), ClockedState(np.zeros(2), 0.0), 0.1, "XY")
