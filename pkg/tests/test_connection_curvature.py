import numpy as np
import pytest
from conftest import batch

from kerrh import connection_curvature as cc
from kerrh.kerr_background import Background, BLPoint, KerrParams


def worst(d: dict) -> float:
    return max(float(np.max(np.abs(v))) for v in d.values())


def test_closed_form_values_schwarzschild():
    rc = cc.ricci_closed_form(KerrParams(1.0, 0.0), BLPoint(4.0, np.pi / 2))
    assert complex(rc.trX) == pytest.approx(0.5)
    assert complex(rc.trXb) == pytest.approx(-2 * (16 - 8) / 4**3)
    assert complex(rc.omegab) == pytest.approx(1 / 16)
    assert abs(complex(rc.H.F1)) < 1e-15


def test_closed_form_on_horizon_trX_and_omegab():
    bg = Background(1.0, 0.0, 2.0, np.pi / 2, horizon_guard=False)
    rc = cc.ricci_jets_closed_form(bg)
    assert rc.trX.value[0] == pytest.approx(1.0)
    assert rc.omegab.value[0] == pytest.approx(0.25)
    assert abs(rc.trXb.value[0]) < 1e-15


def test_P_closed_form_values():
    bg = Background(1.0, 0.0, 3.0, 1.0)
    assert cc.P_closed_form(bg).value[0] == pytest.approx(-2 / 27)
    eq = Background(1.0, 0.8, 3.0, np.pi / 2)
    assert abs(cc.P_closed_form(eq).value[0].imag) < 1e-16


def test_ricci_two_route(bg):
    worst_rel = max(float(np.max(rel)) for _, rel in cc.ricci_two_route(bg).values())
    assert worst_rel <= 1e-9


def test_curvature_two_route_is_the_P_oracle(bg):
    res = cc.curv_two_route(bg)
    assert float(np.max(res["P"][1])) <= 1e-9
    assert max(float(np.max(rel)) for _, rel in res.values()) <= 1e-9


def test_vanishing_coefficients(bg):
    assert worst(cc.kerr_vanishing(bg)) <= 1e-10


@pytest.mark.parametrize("a", [0.0, 0.3, 0.95])
@pytest.mark.parametrize("source", ["closed", "frame"])
def test_q_equations(a, source):
    assert worst(cc.q_equations(batch(a), source)) <= 1e-10


def test_q_equations_generic_point():
    res = cc.q_equations_residual(KerrParams(1.0, 0.3), BLPoint(4.0, 1.0))
    assert len(res) >= 5
    assert max(res.values()) <= 1e-10


def test_H_and_Hb_have_equal_norm(bg_kerr):
    rc = cc.ricci_jets_closed_form(bg_kerr)
    H, Hb = rc.H.value, rc.Hb.value
    assert np.abs(H[0]) == pytest.approx(np.abs(Hb[0]), rel=1e-13)
    assert rc.Z.value == pytest.approx(-Hb, rel=1e-13)


def test_trchb_gradient(bg):
    assert worst(cc.trchb_gradient(bg)) <= 1e-10


def test_null_structure_and_bianchi(bg):
    assert worst(cc.null_structure(bg)) <= 1e-8
    assert worst(cc.bianchi_P(bg)) <= 1e-8


def test_conformal_rescale(bg_kerr):
    assert worst(cc.conformal_rescale(bg_kerr)) <= 1e-9


def test_unknown_source_rejected(bg_schw):
    with pytest.raises(ValueError):
        cc.q_equations(bg_schw, "other")
