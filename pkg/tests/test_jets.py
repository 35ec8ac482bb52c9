import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrh import jets
from kerrh.errors import ModeMismatch, UnsupportedOrder
from kerrh.jets import Jet

finite = st.floats(min_value=0.5, max_value=3.0)


def point(r0: float, t0: float):
    return Jet.variable([r0], 0), Jet.variable([t0], 1)


def fd_derivatives(f, r0, t0, h=1e-4):
    """Central finite differences of a scalar function of (r, theta)."""
    v = f(r0, t0)
    d_r = (f(r0 + h, t0) - f(r0 - h, t0)) / (2 * h)
    d_t = (f(r0, t0 + h) - f(r0, t0 - h)) / (2 * h)
    d_rr = (f(r0 + h, t0) - 2 * v + f(r0 - h, t0)) / h**2
    d_tt = (f(r0, t0 + h) - 2 * v + f(r0, t0 - h)) / h**2
    d_rt = (f(r0 + h, t0 + h) - f(r0 + h, t0 - h) - f(r0 - h, t0 + h) + f(r0 - h, t0 - h)) / (4 * h * h)
    return v, d_r, d_t, d_rr, d_rt, d_tt


@settings(max_examples=40, deadline=None)
@given(finite, finite)
def test_composite_function_matches_finite_differences(r0, t0):
    def expr(r, t, lib):
        return lib.exp(-0.3 * r) * lib.sin(t) ** 2 / (r * r + 2.0 + lib.cos(t)) + lib.sqrt(r) * lib.log(r + 1.0)

    r, t = point(r0, t0)
    J = expr(r, t, jets)
    ref = fd_derivatives(lambda x, y: expr(x, y, np), r0, t0)
    got = (J.value[0], J.d_r[0], J.d_th[0], J.d_rr[0], J.d_rth[0], J.d_thth[0])
    for g, e in zip(got, ref):
        assert abs(g - e) <= 1e-5 * max(1.0, abs(e))


@settings(max_examples=40, deadline=None)
@given(finite, finite, st.floats(min_value=-2.5, max_value=2.5))
def test_power_rule(r0, t0, p):
    r, _ = point(r0, t0)
    J = r**p
    assert J.d_r[0] == pytest.approx(p * r0 ** (p - 1), rel=1e-12)
    assert J.d_rr[0] == pytest.approx(p * (p - 1) * r0 ** (p - 2), rel=1e-12, abs=1e-14)


def test_product_and_quotient_rules():
    r, t = point(2.0, 0.7)
    f = r * jets.sin(t)
    g = r * r + 1.0
    lhs = (f / g).d_r[0]
    rhs = (f.d_r[0] * g.value[0] - f.value[0] * g.d_r[0]) / g.value[0] ** 2
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_dr_lowers_order_and_commutes():
    r, t = point(1.7, 0.9)
    f = r**3 * jets.cos(t)
    assert f.dr().order == 1
    assert f.dr().dth().value[0] == pytest.approx(f.dth().dr().value[0], rel=1e-14)
    assert f.dr().d_th[0] == pytest.approx(f.d_rth[0], rel=1e-14)


def test_mode_phase_is_carried_through_linear_operations():
    r, _ = point(2.0, 1.0)
    f = r.with_mode(0.3, 2)
    g = f * 2.0 + f
    assert (g.om, g.mp) == (0.3, 2)


def test_order_one_jet_has_no_second_derivative():
    r, _ = point(2.0, 1.0)
    with pytest.raises(UnsupportedOrder):
        _ = r.truncate(1).d_rr
    with pytest.raises(UnsupportedOrder):
        r.dr().dr().dr()


def test_adding_different_modes_is_rejected():
    r, _ = point(2.0, 1.0)
    with pytest.raises(ModeMismatch):
        _ = r.with_mode(0.3, 2) + r.with_mode(0.3, 1)


def test_stack_builds_component_axis():
    r, t = point(2.0, 1.0)
    v = jets.stack([r, t])
    assert v.comp == (2,)
    assert v.value[:, 0] == pytest.approx([2.0, 1.0])
