import numpy as np
import pytest
from conftest import batch

from kerrh import hcalculus as hc
from kerrh import jets
from kerrh.errors import SignatureMismatch, UnknownQuantity
from kerrh.hcalculus import FieldSpec, Mode, field_jet, standard_fields

S2 = standard_fields("S2", True, 2)


def max_rel(res) -> float:
    return float(np.max(res.relative))


@pytest.mark.parametrize("kind", hc.COMMUTATOR_KINDS)
def test_commutator_holds_for_three_fields(kind, bg_kerr):
    fields = hc.kind_fields(kind)
    assert len(fields) >= 3
    for spec in fields:
        assert max_rel(hc.commutator_residual(kind, spec, bg_kerr)) <= 1e-8, spec.name


@pytest.mark.parametrize("kind", hc.CANARY_KINDS)
def test_uncorrected_form_canaries_fail_for_rotation(kind, bg_kerr):
    worst = max(max_rel(hc.commutator_residual(kind, s, bg_kerr, "uncorrected")) for s in hc.kind_fields(kind))
    assert worst > 1e-3


def test_scalar_commutator_static_radial_field_schwarzschild(bg_schw):
    # eta = etab = omega = 0 at a = 0, so only the omegab e4 term survives
    spec = FieldSpec("f", "S0", "inv2", "one")
    res = hc.commutator_residual("S0_43", spec, bg_schw)
    c = hc.coeff_values(bg_schw.geometry)
    e4f = bg_schw.geometry.deriv(3, field_jet(spec, bg_schw)).value
    assert res.lhs == pytest.approx(-2 * c.omegab * e4f, rel=1e-12)
    assert res.rhs == pytest.approx(-2 * c.omegab * e4f, rel=1e-12)


def test_unknown_kind():
    with pytest.raises(UnknownQuantity):
        hc.commutator("S9_3a", batch(0.3).geometry, None)
    with pytest.raises(UnknownQuantity):
        FieldSpec("x", "S3", "inv1", "sin")


def test_zero_field_gives_zero(bg_kerr):
    geo = bg_kerr.geometry
    Z = field_jet(S2[0], bg_kerr) * 0.0
    for op in (hc.nabla3, hc.nabla4, hc.laplacian, hc.DDbar_dot):
        assert np.all(op(geo, Z).value == 0)


@pytest.mark.parametrize("op", [hc.nabla3, hc.nabla4, hc.laplacian, hc.DDbar_dot, hc.grad])
def test_operator_linearity(op, bg_kerr):
    geo = bg_kerr.geometry
    a = field_jet(S2[1], bg_kerr)
    b = field_jet(FieldSpec("b", "S2", "inv3", "P3", S2[1].mode), bg_kerr)
    c1, c2 = 0.7 - 1.2j, -0.4 + 2.1j
    lhs = op(geo, a * c1 + b * c2).value
    rhs = c1 * op(geo, a).value + c2 * op(geo, b).value
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(rhs)))


def test_anti_self_duality_preserved(bg_kerr):
    for specU in S2:
        res = hc.structural_zeros(bg_kerr, standard_fields("S1", True)[0], specU)
        assert max(float(np.max(v)) for v in res.values()) <= 1e-10


def test_projection_rotation(bg):
    for spec in S2:
        res = hc.projection_rotation(bg, spec)
        assert max(float(np.max(v)) for v in res.values()) <= 1e-9


def test_static_constant_field_nabla4_is_rotation(bg_kerr):
    spec = FieldSpec("c", "S2", "const", "one")
    U = field_jet(spec, bg_kerr)
    c = hc.coeff_values(bg_kerr.geometry)
    n4 = hc.nabla4(bg_kerr.geometry, U).value[0, 0]
    assert n4 == pytest.approx(1j * c.atrch, abs=1e-12)


def test_conformal_invariance(bg_kerr):
    lam = jets.exp(bg_kerr.r * 0.05) * (1.0 + 0.2 * jets.cos(bg_kerr.theta))
    for s in (-2, 0, 1, 2):
        spec = standard_fields("S2", True, s)[1]
        res = hc.conformal_invariance(bg_kerr, spec, lam)
        assert max(float(np.max(v)) for v in res.values()) <= 1e-9


def test_hodge_consistency(bg):
    for spec in standard_fields("S1", False):
        res = hc.hodge_consistency(bg.geometry, field_jet(spec, bg))
        assert max(float(np.max(v)) for v in res.values()) <= 1e-10


def test_leibniz_and_angular_simplification(bg_kerr):
    h = standard_fields("S0", False)[1]
    F = standard_fields("S1", True)[2]
    U = S2[0]
    res = hc.leibniz_fields(bg_kerr, h, F, U) | hc.angular_simplification_fields(bg_kerr, F, U)
    assert max(float(np.max(v)) for v in res.values()) <= 1e-9


def test_signature_mismatch():
    bg = batch(0.3)
    U = field_jet(S2[0], bg)
    with pytest.raises(SignatureMismatch):
        _ = hc.SField(U, 2) + hc.SField(U, 1)


def test_field_spec_roundtrip():
    spec = FieldSpec("u", "S2", "inv1", "sin", Mode(0.3, 2), 2, True, 1 + 0.5j)
    assert FieldSpec.from_dict(spec.to_dict()) == spec
