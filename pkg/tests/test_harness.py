import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpesplit.harness import (InsufficientSignalError, csv_lines, figure1_data, fit_order, global_order,
                              local_order, roundoff_onset, roundoff_study, scheme_for_order,
                              taylor_coefficients, uniform_convergence_sweep, uniform_grid)
from mpesplit.kernels import KernelKind, SplitSystem
from mpesplit.mpe import build_even, build_final_correction, build_odd
from mpesplit.numerics import DOUBLE, EXTENDED, get_precision
from mpesplit.problems import Problem, get_problem


@given(st.floats(0.5, 12), st.floats(1e-3, 1e3))
def test_fit_order_recovers_power_law(p, c):
    hs = [0.4, 0.2, 0.1, 0.05]
    slope, resid, used = fit_order(hs, [c * h**p for h in hs])
    assert slope == pytest.approx(p, abs=1e-9) and resid < 1e-9 and all(used)


def test_fit_order_floor():
    with pytest.raises(InsufficientSignalError):
        fit_order([0.2, 0.1, 0.05], [1e-3, 1e-20, 1e-21], floor=1e-14)


def test_local_order_examples():
    m = get_problem("matrix2x2")
    assert local_order(m, build_even(2, KernelKind.FROZEN_MIDPOINT), [0.2, 0.1, 0.05]).fitted_order == \
        pytest.approx(5, abs=0.5)
    rep = local_order(m, build_odd(2), [0.2, 0.1, 0.05])
    assert rep.fitted_order == pytest.approx(4, abs=0.5)
    assert rep.hs == sorted(rep.hs, reverse=True) and len(rep.errors) == 3


def test_zero_system_has_no_signal():
    ident = SplitSystem(lambda s, t, h: s, lambda s, t, h: s, lambda s, t, h: s)
    zero = Problem("zero", ident, DOUBLE, exact=lambda t: np.array([1.0, 2.0]), t_start=0.0,
                   initial_state=np.array([1.0, 2.0]))
    with pytest.raises(InsufficientSignalError):
        local_order(zero, build_even(2), [0.2, 0.1, 0.05])


def test_local_order_needs_three_steps():
    with pytest.raises(ValueError):
        local_order(get_problem("matrix2x2"), build_even(2), [0.2, 0.1])


def test_global_order_examples():
    p = get_problem("oscillator")
    assert global_order(p, build_even(2), 1, [4, 8, 16]).fitted_order == pytest.approx(4, abs=0.5)
    with pytest.raises(ValueError):
        global_order(p, build_even(2), 1, [4])


def test_final_correction_endpoint_versus_substates():
    p = get_problem("oscillator")
    fc = build_final_correction(8, 2)
    end = global_order(p, fc, 1, [2, 4, 8])
    sub = global_order(p, fc, 1, [2, 4, 8], observe="substate")
    assert end.fitted_order == pytest.approx(4, abs=0.5)
    # uncorrected substates carry the second-order kernel's h^3 local error
    assert sub.fitted_order == pytest.approx(3, abs=0.5)
    assert all(s > e for s, e in zip(sub.errors, end.errors))
    with pytest.raises(ValueError):
        global_order(p, build_even(2), 1, [2, 4], observe="substate")


# the oscillator at orders 8 and 10 reaches the double floor before its asymptotic
# range, so those two are fitted in extended precision below
@pytest.mark.parametrize("name,order", [("matrix2x2", o) for o in (2, 4, 6, 8, 10)]
                         + [("oscillator", o) for o in (2, 4, 6)])
def test_smooth_problem_orders_double(name, order):
    p = get_problem(name)
    hs = [0.8, 0.6, 0.5, 0.4] if order >= 8 else [0.4, 0.2, 0.1]
    rep = local_order(p, scheme_for_order(order, p.default_kernel), hs)
    assert rep.fitted_order == pytest.approx(order + 1, abs=0.5)


@pytest.mark.parametrize("order", [8, 10, 14, 20])
def test_smooth_problem_orders_extended(order):
    with EXTENDED.context():
        p = get_problem("oscillator", EXTENDED)
        rep = local_order(p, scheme_for_order(order), ["0.2", "0.1", "0.05"])
        assert rep.fitted_order == pytest.approx(order + 1, abs=0.5)


def test_floor_scales_with_precision():
    with EXTENDED.context():
        assert DOUBLE.eps / EXTENDED.eps > 1e10


def test_scheme_for_order():
    assert scheme_for_order(6).kernel is KernelKind.STRANG_BA
    assert scheme_for_order(7).kernel is KernelKind.ODD_BASIS
    with pytest.raises(ValueError):
        scheme_for_order(5, KernelKind.STRANG_AB)
    with pytest.raises(ValueError):
        scheme_for_order(0)


def test_sweep_order_two_matches_closed_form():
    from reference_values import f_closed
    m = get_problem("matrix2x2")
    grid = uniform_grid(0, 4, 21)
    s = uniform_convergence_sweep(m, [2], grid)
    assert np.allclose(s.values[2], [f_closed(2, t) for t in grid], rtol=1e-13, atol=0)


def test_matrix_sweep_never_grows_with_order():
    m = get_problem("matrix2x2")
    grid = uniform_grid(0, 4, 200)
    orders = [2, 4, 6, 8, 10]
    s = uniform_convergence_sweep(m, orders, grid)
    floor = 100 * DOUBLE.eps
    for i, t in enumerate(grid):
        errs = [s.errors[o][i] for o in orders]
        scale = max(1.0, abs(s.exact[i]))
        for a, b in zip(errs, errs[1:]):
            assert b <= a or a <= floor * scale


def test_sweep_parallel_is_deterministic():
    m = get_problem("oscillator")
    grid = uniform_grid(0.1, 3, 17)
    a = uniform_convergence_sweep(m, [4, 6, 8], grid)
    b = uniform_convergence_sweep(m, [4, 6, 8], grid, jobs=2)
    assert a.values == b.values


def test_roundoff_low_order_identical():
    grid = [str(t) for t in uniform_grid("0.1", 5, 20, EXTENDED)]
    r = roundoff_study("hydrogen", [4, 40], grid)
    for o in (4,):
        assert max(abs(float(x) - float(y)) for x, y in zip(r.double.values[o], r.extended.values[o])) < 1e-12
    assert r.extended.max_error(40) <= r.double.max_error(40)


def test_roundoff_onset_rule():
    assert roundoff_onset([10, 20, 30, 40], [0, 1e-9, 0.5, 2], [1, 1, 1, 1]) == 30
    assert roundoff_onset([10, 20], [0, 0], [1, 1]) is None
    assert roundoff_onset([10, 20, 30], [1, 0, 1], [1, 1, 1]) == 30


def test_taylor_coefficients_of_known_function():
    c = taylor_coefficients(lambda ts: [mpmath.exp(t) for t in ts], 6, "0.5", fit_degree=24)
    for j, x in enumerate(c):
        assert abs(x - 1 / mpmath.factorial(j)) < 1e-12


def test_csv_header_and_digits():
    lines = csv_lines(["t", "x"], [[0.1, 1 / 3]], DOUBLE, {"kernel": "ba", "scheme": "s"})
    assert lines[0].startswith("# precision=double kernel=ba scheme=s version=")
    assert lines[1] == "t,x"
    assert lines[2] == "1.0000000000000001e-01,3.3333333333333331e-01"


def test_figure1_shape():
    lines = figure1_data(points=5)
    assert lines[1] == "t,exact,magnus_4,magnus_6,magnus_8,magnus_10,mpe_2,mpe_4,mpe_6,mpe_8,mpe_10"
    assert len(lines) == 7
    assert all(len(l.split(",")) == 11 for l in lines[2:])
