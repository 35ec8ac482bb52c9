import numpy as np
import pytest
from conftest import batch

from kerrh import connection_curvature as cc
from kerrh import jets
from kerrh import wave_operators as wo
from kerrh.errors import DivisionNearZero, UnknownQuantity
from kerrh.hcalculus import FieldSpec, Mode, field_jet, standard_fields
from kerrh.kerr_background import Background

S2 = standard_fields("S2", True)
S2R = standard_fields("S2", False)
A2 = standard_fields("S2", True, 2)
S0 = standard_fields("S0", False)


def rel(res) -> float:
    return float(np.max(res.relative))


# ------------------------------------------------------------------ box2
@pytest.mark.parametrize("route", ["item1", "item3", "complex", "conformal"])
def test_box2_routes_agree(route, bg):
    for spec in S2:
        assert rel(wo.box2_equivalence(bg.geometry, field_jet(spec, bg), route)) <= 1e-8


@pytest.mark.parametrize("route", ["item1", "item3"])
def test_box2_real_forms_on_general_tensors(route, bg_kerr):
    for spec in S2R:
        assert rel(wo.box2_equivalence(bg_kerr.geometry, field_jet(spec, bg_kerr), route)) <= 1e-8


@pytest.mark.parametrize(
    "route, variant",
    [("item3_uncorrected", ""), ("item1_derived", ""), ("complex", "uncorrected"), ("complex", "as_derived")],
)
def test_box2_known_wrong_forms_are_detected(route, variant, bg_kerr):
    worst = max(rel(wo.box2_equivalence(bg_kerr.geometry, field_jet(s, bg_kerr), route, variant)) for s in S2)
    assert worst > 1e-3


def test_box2_unknown_variant(bg_kerr):
    with pytest.raises(UnknownQuantity):
        wo.box2_zeroth(bg_kerr.geometry, "nonsense")


def test_box2_zero_field(bg_kerr):
    Z = field_jet(S2[0], bg_kerr) * 0.0
    for route in ("direct", "item3", "complex"):
        assert np.all(np.abs(wo.box2(bg_kerr.geometry, Z, route)) == 0)


def test_box2_linearity(bg_kerr):
    geo = bg_kerr.geometry
    a, b = field_jet(S2[1], bg_kerr), field_jet(FieldSpec("b", "S2", "inv3", "P3", S2[1].mode), bg_kerr)
    c1, c2 = 1.5 + 0.2j, -0.3 - 0.9j
    lhs = wo.box2(geo, a * c1 + b * c2, "complex")
    rhs = c1 * wo.box2(geo, a, "complex") + c2 * wo.box2(geo, b, "complex")
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_box2_preserves_anti_self_duality(bg_kerr):
    for spec in S2:
        B = wo.box2(bg_kerr.geometry, field_jet(spec, bg_kerr), "direct")
        assert np.max(np.abs(B[0, 1] + 1j * B[0, 0])) <= 1e-10 * np.max(np.abs(B))


def test_constant_field_box_at_a_zero(bg_schw):
    assert rel(wo.constant_field_box(bg_schw)) <= 1e-8


@pytest.mark.parametrize(
    "fn",
    [wo.dd_hot_ddbar_identity, wo.gauss_s2_identity],
)
def test_decomposition_and_gauss(fn, bg):
    for spec in S2:
        assert rel(fn(bg.geometry, field_jet(spec, bg))) <= 1e-8


def test_curvature_commutator_and_emt(bg_kerr):
    geo = bg_kerr.geometry
    V = field_jet(FieldSpec("V", "S0", "inv2", "cos"), bg_kerr)
    for spec in S2R:
        U = field_jet(spec, bg_kerr)
        assert rel(wo.curvature_commutator(geo, U)) <= 1e-8
        assert rel(wo.emt_divergence_residual(geo, U, V)) <= 1e-7
    assert rel(wo.emt_divergence_residual(geo, field_jet(S2R[0], bg_kerr), V, "spacetime")) > 1e-3


def test_emt_zero_field(bg_kerr):
    U = field_jet(S2R[0], bg_kerr) * 0.0
    V = field_jet(S0[0], bg_kerr)
    assert np.all(wo.emt(bg_kerr.geometry, U, V) == 0)


# ------------------------------------------------------------- Teukolsky
def test_teukolsky_c3_schwarzschild_value():
    c = wo.teukolsky_coeffs(Background(1.0, 0.0, 4.0, 1.0).geometry)
    assert c.c3[0] == pytest.approx(-1.25, abs=1e-14)
    assert c.principal_43[0] == -1 and c.principal_dd[0] == 0.5


def test_teukolsky_forms_and_conformal(bg):
    lam = cc.conformal_lambda(bg)
    for spec in A2:
        A = field_jet(spec, bg)
        for res in wo.teukolsky_forms(bg.geometry, A).values():
            assert rel(res) <= 1e-8
        assert rel(wo.teukolsky_conformal(bg.geometry, A, lam)) <= 1e-8


def test_teukolsky_zero_and_asd(bg_kerr):
    A = field_jet(A2[2], bg_kerr)
    L = wo.teukolsky_L(bg_kerr.geometry, A)
    assert np.all(np.isfinite(L))
    assert np.max(np.abs(L[0, 1] + 1j * L[0, 0])) <= 1e-10 * np.max(np.abs(L))
    assert np.all(wo.teukolsky_L(bg_kerr.geometry, A * 0.0) == 0)


def test_teukolsky_projection_and_lemma(bg):
    for spec in A2:
        A = field_jet(spec, bg)
        assert rel(wo.teukolsky_projection(bg, A)) <= 1e-8
        for name, res in wo.projection_lemma_residuals(bg, A).items():
            assert rel(res) <= 1e-8, name


def test_classical_teukolsky_chain(bg):
    for spec in S0:
        assert rel(wo.classical_teukolsky_residual(bg, field_jet(spec, bg))) <= 1e-8


# ------------------------------------------------------------ scalar box
def test_scalar_box_of_inverse_r_schwarzschild():
    r = np.array([3.0, 5.0, 9.0])
    bg = Background(1.0, 0.0, r, np.full(3, 1.1))
    psi = 1.0 / bg.r
    # (1/r^2) d_r (r^2 (1 - 2m/r) d_r (1/r)) = (1/r^2) d_r (-(1 - 2/r)) = -2 / r^4
    assert wo.scalar_box_g(bg, psi) == pytest.approx(-2 / r**4, rel=1e-12)
    const = bg.r * 0.0 + 1.0
    assert np.max(np.abs(wo.scalar_box_g(bg, const))) < 1e-14


def test_scalar_box_routes(bg):
    for spec in S0:
        for res in wo.scalar_box_routes(bg, field_jet(spec, bg)).values():
            assert rel(res) <= 1e-8


# ------------------------------------------------------------ potentials
def test_potential_identities(bg):
    for name, res in wo.potential_w_identities(bg).items():
        assert rel(res) <= 1e-9, name


def test_uncorrected_imaginary_potential_fails(bg_kerr):
    assert rel(wo.potential_w_identities(bg_kerr, "uncorrected")["ImW"]) > 1e-3


def test_potential_at_a_zero_and_equator(bg_schw):
    assert np.max(np.abs(wo.potential_w(bg_schw).ImW)) < 1e-15
    eq = Background(1.0, 0.6, np.array([3.0, 7.0]), np.full(2, np.pi / 2))
    assert np.max(np.abs(wo.potential_w(eq).ImW)) < 1e-15


# ----------------------------------------------------------- remainder
def test_remainder_vanishes_at_a_zero(bg_schw):
    for spec in S2:
        assert np.max(np.abs(wo.projection_wave_remainder(bg_schw, field_jet(spec, bg_schw)))) <= 1e-8


def test_remainder_field_independent_and_closed_form(bg_kerr):
    ratios = [wo.remainder_over_psi(bg_kerr, field_jet(s, bg_kerr)) for s in S2]
    for r in ratios[1:]:
        assert np.nanmax(np.abs(r - ratios[0])) <= 1e-7
    assert ratios[0] == pytest.approx(wo.remainder_closed_form(bg_kerr), rel=1e-8)
    for s in S2:
        assert rel(wo.remainder_identity(bg_kerr, field_jet(s, bg_kerr))) <= 1e-8


def test_remainder_is_quadratic_not_linear_in_a():
    lo, hi = batch(0.3), batch(0.6)
    ratio = wo.remainder_closed_form(hi) / wo.remainder_closed_form(lo)
    # at fixed (r, theta) the a-dependence is a^2 (|q|^2 + 2mr)/|q|^6, so the ratio is near 4, not 2
    assert np.all(ratio > 2.5)


def test_remainder_over_psi_near_zero():
    bg = Background(1.0, 0.3, np.array([4.0]), np.array([1.0]))
    Psi = field_jet(S2[0], bg) * 0.0
    assert np.isnan(wo.remainder_over_psi(bg, Psi)[0])
    with pytest.raises(DivisionNearZero):
        wo.remainder_over_psi(bg, Psi, strict=True)


# ------------------------------------------------------- Chandrasekhar
@pytest.mark.parametrize("f", [0.0, 1.0, -2.5])
def test_transport_C_D(f, bg):
    for res in wo.transport_CD_residual(bg.geometry, f).values():
        assert rel(res) <= 1e-9


def test_transport_D_needs_minus_four(bg_kerr):
    res = wo.transport_CD_residual(bg_kerr.geometry, 0.0, 3.0)
    assert rel(res["C"]) <= 1e-9
    assert rel(res["D"]) > 1e-3


def test_qf_rescale_and_zero(bg_kerr):
    lam = cc.conformal_lambda(bg_kerr)
    for spec in A2:
        A = field_jet(spec, bg_kerr)
        for f in (0.0, 1.0):
            assert rel(wo.qf_rescale(bg_kerr, A, lam, f)) <= 1e-8
    assert np.all(wo.qf(bg_kerr, field_jet(A2[0], bg_kerr) * 0.0) == 0)


def test_chandra_Q_preserves_anti_self_duality(bg_kerr):
    Q = wo.chandra_Q(bg_kerr.geometry, field_jet(A2[1], bg_kerr))
    assert np.max(np.abs(Q[0, 1] + 1j * Q[0, 0])) <= 1e-10 * np.max(np.abs(Q))


# ------------------------------------------------------------------ RW
def test_rw_radial_coefficient_value():
    bg = Background(1.0, 0.0, 4.0, 1.0)
    assert wo.rw_radial_coefficient(bg)[0] == pytest.approx(-0.125)
    rc = cc.ricci_jets_closed_form(bg)
    assert abs(rc.trch.value[0] * rc.trchb.value[0]) == pytest.approx(0.125)


def test_rw_schwarzschild_check(bg_schw):
    assert rel(wo.rw_schwarzschild_check(bg_schw)) <= 1e-9


def test_rw_operator_zero_and_linear(bg_kerr):
    psi = field_jet(FieldSpec("p", "S0", "inv1", "sin", Mode(0.3, 2)), bg_kerr)
    assert np.all(wo.rw_scalar_operator(bg_kerr, psi * 0.0) == 0)
    lhs = wo.rw_scalar_operator(bg_kerr, psi * (2 - 1j))
    assert lhs == pytest.approx((2 - 1j) * wo.rw_scalar_operator(bg_kerr, psi), rel=1e-12)


def test_conformal_lambda_is_mode_free(bg_kerr):
    lam = cc.conformal_lambda(bg_kerr)
    assert lam.om == 0 and lam.mp == 0
    assert np.all(np.abs(lam.value) > 0)
    assert isinstance(lam, jets.Jet)
