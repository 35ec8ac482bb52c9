"""Connection and curvature bundles of the Kerr principal null frame.

Two independent routes are provided for every coefficient: contraction of
the frame connection ``g(D_A e_B, e_C)`` and the closed-form Kerr values in
terms of ``q = r + i a cos(theta)``.  Real quantities are carried as jets so
that their frame derivatives are available to the structure-equation checks.

Index conventions (frame slots ``e1, e2, e3, e4``)::

    chi_ab  = g(D_a e4, e_b)      chib_ab  = g(D_a e3, e_b)
    xi_a    = 1/2 g(D_4 e4, e_a)  xib_a    = 1/2 g(D_3 e3, e_a)
    eta_a   = 1/2 g(D_3 e4, e_a)  etab_a   = 1/2 g(D_4 e3, e_a)
    zeta_a  = 1/2 g(D_a e4, e3)
    omega   = 1/4 g(D_4 e4, e3)   omegab   = 1/4 g(D_3 e3, e4)

Complexified coefficients follow ``F = f + i *f`` and
``tr X = tr chi - i atr chi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .htensor_algebra import (
    EPS,
    HSym2C,
    HVecC,
    _hot_deriv,
    _norm,
    cD,
    cDbar,
    dot1,
    dual1,
    hot1,
    tr,
)
from .jets import Jet, linear
from .kerr_background import (
    E1,
    E2,
    E3,
    E4,
    Background,
    BLPoint,
    FrameGeometry,
    KerrParams,
)

H = slice(0, 2)


# ---------------------------------------------------------------- containers
@dataclass(frozen=True)
class RicciSet:
    """Complexified connection coefficients at a batch of points."""

    trX: np.ndarray
    trXb: np.ndarray
    Xhat: HSym2C
    Xbhat: HSym2C
    H: HVecC
    Hb: HVecC
    Z: HVecC
    Xi: HVecC
    Xib: HVecC
    omega: np.ndarray
    omegab: np.ndarray

    @property
    def trch(self) -> np.ndarray:
        return self.trX.real

    @property
    def atrch(self) -> np.ndarray:
        return -self.trX.imag

    @property
    def trchb(self) -> np.ndarray:
        return self.trXb.real

    @property
    def atrchb(self) -> np.ndarray:
        return -self.trXb.imag

    def members(self) -> dict[str, np.ndarray]:
        """Flat view ``name -> array`` with the component axis leading when present."""
        return {
            "trX": self.trX,
            "trXb": self.trXb,
            "Xhat": self.Xhat.U11,
            "Xbhat": self.Xbhat.U11,
            "H": self.H.F1,
            "Hb": self.Hb.F1,
            "Z": self.Z.F1,
            "Xi": self.Xi.F1,
            "Xib": self.Xib.F1,
            "omega": self.omega,
            "omegab": self.omegab,
        }

    def point(self, k: int) -> RicciSet:
        """Values at the ``k``-th point of the batch."""
        pick = lambda x: np.asarray(x)[..., k]
        return RicciSet(
            trX=pick(self.trX),
            trXb=pick(self.trXb),
            Xhat=HSym2C(pick(self.Xhat.U11)),
            Xbhat=HSym2C(pick(self.Xbhat.U11)),
            H=HVecC(pick(self.H.F1)),
            Hb=HVecC(pick(self.Hb.F1)),
            Z=HVecC(pick(self.Z.F1)),
            Xi=HVecC(pick(self.Xi.F1)),
            Xib=HVecC(pick(self.Xib.F1)),
            omega=pick(self.omega),
            omegab=pick(self.omegab),
        )


@dataclass(frozen=True)
class CurvSet:
    """Complexified null Weyl components ``A, Abar, B, Bbar, P`` at a batch of points.

    ``Abar`` and ``Bbar`` denote the underlined components (the ``e3`` side).
    """

    A: HSym2C
    Abar: HSym2C
    B: HVecC
    Bbar: HVecC
    P: np.ndarray

    def members(self) -> dict[str, np.ndarray]:
        return {
            "A": self.A.U11,
            "Abar": self.Abar.U11,
            "B": self.B.F1,
            "Bbar": self.Bbar.F1,
            "P": self.P,
        }

    def point(self, k: int) -> CurvSet:
        pick = lambda x: np.asarray(x)[..., k]
        return CurvSet(
            A=HSym2C(pick(self.A.U11)),
            Abar=HSym2C(pick(self.Abar.U11)),
            B=HVecC(pick(self.B.F1)),
            Bbar=HVecC(pick(self.Bbar.F1)),
            P=pick(self.P),
        )


@dataclass(frozen=True)
class QScalar:
    """The complex function ``q = r + i a cos(theta)``."""

    q: complex

    @property
    def qbar(self) -> complex:
        return complex(np.conj(self.q))

    @property
    def abs2(self) -> float:
        return float(abs(self.q) ** 2)


def q_scalar(params: KerrParams, point: BLPoint) -> QScalar:
    return QScalar(complex(point.r, params.a * np.cos(point.theta)))


# ------------------------------------------------------------ jet helpers
def cvec(f: Jet) -> Jet:
    """``f + i *f`` for a real horizontal 1-form jet (component shape ``(2,)``)."""
    return f + linear("ab,b->a", EPS, f) * 1j


def csym(u: Jet) -> Jet:
    """``u + i *u`` for a symmetric traceless 2-tensor jet (left dual)."""
    return u + linear("ac,cb->ab", EPS, u) * 1j


def trace(u: Jet) -> Jet:
    return u[0, 0] + u[1, 1]


def antitrace(u: Jet) -> Jet:
    return u[0, 1] - u[1, 0]


def hat_part(u: Jet) -> Jet:
    sym = (u + jets.Jet(np.swapaxes(u.c, 1, 2), u.order, u.om, u.mp)) * 0.5
    half_tr = trace(u) * 0.5
    eye = jets.stack([jets.stack([half_tr, half_tr * 0.0]), jets.stack([half_tr * 0.0, half_tr])])
    return sym - eye


def from_trace(trace_: Jet, antitrace_: Jet) -> Jet:
    """``1/2 delta tr + 1/2 eps atr`` as a 2-tensor jet."""
    t, s = trace_ * 0.5, antitrace_ * 0.5
    return jets.stack([jets.stack([t, s]), jets.stack([-s, t])])


@dataclass(frozen=True)
class RicciJets:
    """Real connection coefficients as jets over a batch of points."""

    chi: Jet
    chib: Jet
    eta: Jet
    etab: Jet
    zeta: Jet
    xi: Jet
    xib: Jet
    omega: Jet
    omegab: Jet

    # real scalars
    @property
    def trch(self) -> Jet:
        return trace(self.chi)

    @property
    def atrch(self) -> Jet:
        return antitrace(self.chi)

    @property
    def trchb(self) -> Jet:
        return trace(self.chib)

    @property
    def atrchb(self) -> Jet:
        return antitrace(self.chib)

    # complexified
    @property
    def trX(self) -> Jet:
        return self.trch - self.atrch * 1j

    @property
    def trXb(self) -> Jet:
        return self.trchb - self.atrchb * 1j

    @property
    def Xhat(self) -> Jet:
        return csym(hat_part(self.chi))

    @property
    def Xbhat(self) -> Jet:
        return csym(hat_part(self.chib))

    @property
    def H(self) -> Jet:
        return cvec(self.eta)

    @property
    def Hb(self) -> Jet:
        return cvec(self.etab)

    @property
    def Z(self) -> Jet:
        return cvec(self.zeta)

    @property
    def Xi(self) -> Jet:
        return cvec(self.xi)

    @property
    def Xib(self) -> Jet:
        return cvec(self.xib)

    def values(self) -> RicciSet:
        return RicciSet(
            trX=self.trX.value,
            trXb=self.trXb.value,
            Xhat=HSym2C(self.Xhat.value[0, 0]),
            Xbhat=HSym2C(self.Xbhat.value[0, 0]),
            H=HVecC(self.H.value[0]),
            Hb=HVecC(self.Hb.value[0]),
            Z=HVecC(self.Z.value[0]),
            Xi=HVecC(self.Xi.value[0]),
            Xib=HVecC(self.Xib.value[0]),
            omega=self.omega.value.real,
            omegab=self.omegab.value.real,
        )


# ------------------------------------------------------------------ routes
def ricci_jets_from_frame(geo: FrameGeometry) -> RicciJets:
    """Connection coefficients by contraction of ``g(D_A e_B, e_C)``."""
    C = geo.conn
    return RicciJets(
        chi=C[H, E4, H],
        chib=C[H, E3, H],
        xi=C[E4, E4, H] * 0.5,
        xib=C[E3, E3, H] * 0.5,
        eta=C[E3, E4, H] * 0.5,
        etab=C[E4, E3, H] * 0.5,
        zeta=C[H, E4, E3] * 0.5,
        omega=C[E4, E4, E3] * 0.25,
        omegab=C[E3, E3, E4] * 0.25,
    )


def _vec(f1: Jet, f2: Jet) -> Jet:
    return jets.stack([f1, f2])


def ricci_jets_closed_form(bg: Background) -> RicciJets:
    """Closed-form Kerr coefficients in the principal frame with ``omega = 0``."""
    q, qa, sn, cs, d, r = bg.q, bg.qabs, bg.sin, bg.cos, bg.delta, bg.r
    m, a = bg.m, bg.a
    qa3 = qa**3
    q4 = bg.q2 * bg.q2
    trX = 2.0 / q
    trXb = -2.0 * d * q / q4
    Hc = _vec(q * (1j * a) * sn / qa3, q * a * sn / qa3)
    Zc = _vec(q.conj() * (1j * a) * sn / qa3, q.conj() * a * sn / qa3)
    zeta = _vec(Zc[0].real, Zc[1].real)
    omegab = ((r - m) * (a * a) * cs * cs + r * r * m - r * (a * a)) / q4
    zero_v = Jet.zeros(bg.npts, bg.order, (2,))
    return RicciJets(
        chi=from_trace(trX.real, -trX.imag),
        chib=from_trace(trXb.real, -trXb.imag),
        eta=_vec(Hc[0].real, Hc[1].real),
        etab=-zeta,
        zeta=zeta,
        xi=zero_v,
        xib=zero_v,
        omega=Jet.zeros(bg.npts, bg.order),
        omegab=omegab,
    )


def _csym_values(u: np.ndarray) -> HSym2C:
    return HSym2C(u[0, 0] + 1j * u[1, 0])


def _cvec_values(f: np.ndarray) -> HVecC:
    return HVecC(f[0] + 1j * f[1])


def curv_values_from_riemann(geo: FrameGeometry) -> CurvSet:
    """Null Weyl components of the frame Riemann tensor, complexified."""
    R4 = geo.riemann
    alpha = R4[H, E4, H, E4]
    alphab = R4[H, E3, H, E3]
    beta = 0.5 * R4[H, E4, E3, E4]
    betab = 0.5 * R4[H, E3, E3, E4]
    rho = 0.25 * R4[E3, E4, E3, E4]
    rho_dual = 0.5 * R4[E1, E2, E3, E4]
    return CurvSet(
        A=_csym_values(alpha),
        Abar=_csym_values(alphab),
        B=_cvec_values(beta),
        Bbar=_cvec_values(betab),
        P=rho + 1j * rho_dual,
    )


def P_closed_form(bg: Background) -> Jet:
    """``P = -2 m / q^3`` as a jet."""
    return -2.0 * bg.m / bg.q**3


def curv_values_closed_form(bg: Background) -> CurvSet:
    zero = np.zeros(bg.npts, dtype=complex)
    return CurvSet(
        A=HSym2C(zero),
        Abar=HSym2C(zero.copy()),
        B=HVecC(zero.copy()),
        Bbar=HVecC(zero.copy()),
        P=P_closed_form(bg).value,
    )


# ------------------------------------------------------ single-point API
def ricci_from_frame(params: KerrParams, point: BLPoint) -> RicciSet:
    bg = Background.at(params, point)
    return ricci_jets_from_frame(bg.geometry).values().point(0)


def ricci_closed_form(params: KerrParams, point: BLPoint) -> RicciSet:
    bg = Background.at(params, point)
    return ricci_jets_closed_form(bg).values().point(0)


def curv_from_riemann(params: KerrParams, point: BLPoint) -> CurvSet:
    bg = Background.at(params, point)
    return curv_values_from_riemann(bg.geometry).point(0)


def curv_closed_form(params: KerrParams, point: BLPoint) -> CurvSet:
    bg = Background.at(params, point)
    return curv_values_closed_form(bg).point(0)


def q_equations_residual(params: KerrParams, point: BLPoint) -> dict[str, float]:
    res = q_equations(Background.at(params, point))
    return {k: float(v[0]) for k, v in res.items()}


def trchb_gradient_residual(params: KerrParams, point: BLPoint) -> dict[str, float]:
    res = trchb_gradient(Background.at(params, point))
    return {k: float(v[0]) for k, v in res.items()}


# -------------------------------------------------------------- comparisons
def _bundle_scale(members: dict[str, np.ndarray]) -> np.ndarray:
    """Largest modulus over all members at each point (never below tiny)."""
    mags = [np.abs(v).reshape(-1, v.shape[-1]).max(axis=0) for v in members.values()]
    return np.maximum(np.max(mags, axis=0), np.finfo(float).tiny)


def compare_members(x: dict[str, np.ndarray], y: dict[str, np.ndarray]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-member ``(absolute, relative)`` residuals; relative to the bundle scale of ``y``."""
    scale = _bundle_scale(y)
    out = {}
    for k, yk in y.items():
        diff = np.abs(np.asarray(x[k]) - np.asarray(yk))
        diff = diff.reshape(-1, diff.shape[-1]).max(axis=0)
        out[k] = (diff, diff / scale)
    return out


def ricci_two_route(bg: Background) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    frame = ricci_jets_from_frame(bg.geometry).values().members()
    closed = ricci_jets_closed_form(bg).values().members()
    return compare_members(frame, closed)


def curv_two_route(bg: Background) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    riem = curv_values_from_riemann(bg.geometry).members()
    closed = curv_values_closed_form(bg).members()
    return compare_members(riem, closed)


def kerr_vanishing(bg: Background) -> dict[str, np.ndarray]:
    """Coefficients that vanish identically on Kerr, from the frame route."""
    rs = ricci_jets_from_frame(bg.geometry).values()
    cs = curv_values_from_riemann(bg.geometry)
    return {
        "Xhat": np.abs(rs.Xhat.U11),
        "Xbhat": np.abs(rs.Xbhat.U11),
        "Xi": np.abs(rs.Xi.F1),
        "Xib": np.abs(rs.Xib.F1),
        "omega": np.abs(rs.omega),
        "Hb_plus_Z": np.abs(rs.Hb.F1 + rs.Z.F1),
        "A": np.abs(cs.A.U11),
        "Abar": np.abs(cs.Abar.U11),
        "B": np.abs(cs.B.F1),
        "Bbar": np.abs(cs.Bbar.F1),
    }


# ------------------------------------------------------- derivative helpers
def hgrad(geo: FrameGeometry, U: Jet) -> Jet:
    """``nabla_a U`` with the derivative index leading (component shape ``(2, ...)``)."""
    return jets.stack([geo.hderiv(E1, U), geo.hderiv(E2, U)])


def _select(bg: Background, source: str) -> RicciJets:
    if source == "frame":
        return ricci_jets_from_frame(bg.geometry)
    if source == "closed":
        return ricci_jets_closed_form(bg)
    raise ValueError(f"unknown coefficient source {source!r}")


# --------------------------------------------------------------- q calculus
def q_equations(bg: Background, source: str = "closed") -> dict[str, np.ndarray]:
    """Residuals of the transport and angular equations satisfied by ``q``."""
    geo = bg.geometry
    rc = _select(bg, source)
    q = bg.q
    qv = q.value
    trX, trXb = rc.trX.value, rc.trXb.value
    Hv, Hbv = rc.H.value, rc.Hb.value
    dq = hgrad(geo, q).value
    return {
        "nabla4_q": np.abs(geo.deriv(E4, q).value - 0.5 * trX * qv),
        "nabla3_q": np.abs(geo.deriv(E3, q).value - 0.5 * np.conj(trXb) * qv),
        "D_q": _norm(cD(dq) - qv * Hbv, 1),
        "Dbar_q": _norm(cDbar(dq) - qv * np.conj(Hv), 1),
        "qHb_plus_qbarH": _norm(qv * Hbv + np.conj(qv) * Hv, 1),
        "absH_eq_absHb": np.abs(dot1(Hv, np.conj(Hv)) - dot1(Hbv, np.conj(Hbv))),
    }


def trchb_gradient(bg: Background, source: str = "frame") -> dict[str, np.ndarray]:
    """Gradient formulas for ``tr chib`` and ``atr chib`` and the trace/eta relation."""
    geo = bg.geometry
    rc = _select(bg, source)
    trb, atrb = rc.trchb, rc.atrchb
    eta, etab = rc.eta.value.real, rc.etab.value.real
    t, s = trb.value.real, atrb.value.real
    g_tr = hgrad(geo, trb).value
    g_atr = hgrad(geo, atrb).value
    sum_ = eta + etab
    dd = dual1(eta) - dual1(etab)
    return {
        "grad_trchb": _norm(g_tr - (-1.5 * t * sum_ - 0.5 * s * dd), 1),
        "grad_atrchb": _norm(g_atr - (-1.5 * s * sum_ + 0.5 * t * dd), 1),
        "relation_tr_eta": _norm(0.5 * t * sum_ - 0.5 * s * dd, 1),
    }


# ------------------------------------------------------- structure equations
def null_structure(bg: Background, source: str = "frame") -> dict[str, np.ndarray]:
    """Complex null structure equations on Kerr, where every shear, ``Xi`` and ``omega`` term drops.

    Each residual is ``|lhs - rhs|`` with the surviving terms only; the
    dropped terms are separately certified to vanish by :func:`kerr_vanishing`.
    """
    geo = bg.geometry
    rc = _select(bg, source)
    P = P_closed_form(bg).value
    trX, trXb = rc.trX, rc.trXb
    Hj, Hbj, Zj = rc.H, rc.Hb, rc.Z
    tX, tXb = trX.value, trXb.value
    Hv, Hbv, Zv = Hj.value, Hbj.value, Zj.value
    w, wb = rc.omega.value, rc.omegab.value
    d3 = lambda f: geo.hderiv(E3, f).value
    d4 = lambda f: geo.hderiv(E4, f).value
    dH = hgrad(geo, Hj).value
    dHb = hgrad(geo, Hbj).value
    dHc = np.conj(dH)
    dHbc = np.conj(dHb)
    dw_b = hgrad(geo, rc.omegab).value
    d_trXc = hgrad(geo, trX.conj()).value
    d_trXbc = hgrad(geo, trXb.conj()).value
    eta, etab, zeta = (x.value.real for x in (rc.eta, rc.etab, rc.zeta))
    curl_zeta = np.einsum("ab,abz->z", EPS, hgrad(geo, rc.zeta).value).real
    trch, atrch = tX.real, -tX.imag
    trchb, atrchb = tXb.real, -tXb.imag
    rho_dual = P.imag
    return {
        "nabla3_trXb": np.abs(d3(trXb) + 0.5 * tXb**2 + 2 * wb * tXb),
        "nabla3_trX": np.abs(
            d3(trX) + 0.5 * tXb * tX - 2 * wb * tX
            - (tr(cD(dHc)) + dot1(Hv, np.conj(Hv)) + 2 * P)
        ),
        "nabla4_trXb": np.abs(
            d4(trXb) + 0.5 * tX * tXb - 2 * w * tXb
            - (tr(cD(dHbc)) + dot1(Hbv, np.conj(Hbv)) + 2 * np.conj(P))
        ),
        "nabla4_trX": np.abs(d4(trX) + 0.5 * tX**2 + 2 * w * tX),
        "D_hot_H": _norm(_hot_deriv(cD(dH)) + hot1(Hv, Hv), 2),
        "D_hot_Hb": _norm(_hot_deriv(cD(dHb)) + hot1(Hbv, Hbv), 2),
        "nabla3_Z": _norm(
            d3(Zj) + 0.5 * tXb * (Zv + Hv) - 2 * wb * (Zv - Hv) + 2 * cD(dw_b), 1
        ),
        "nabla4_Z": _norm(d4(Zj) + 0.5 * tX * (Zv - Hbv) - 2 * w * (Zv + Hbv), 1),
        "nabla3_Hb": _norm(d3(Hbj) + 0.5 * np.conj(tXb) * (Hbv - Hv), 1),
        "nabla4_H": _norm(d4(Hj) + 0.5 * np.conj(tX) * (Hv - Hbv), 1),
        "omega_pair": np.abs(
            d3(rc.omega) + d4(rc.omegab) - 4 * w * wb
            - dot1(eta - etab, zeta) + dot1(eta, etab) - P.real
        ),
        "codazzi_X": _norm(
            0.5 * cD(d_trXc) + 0.5 * np.conj(tX) * Zv - 1j * tX.imag * Hv, 1
        ),
        "codazzi_Xb": _norm(
            0.5 * cD(d_trXbc) - 0.5 * np.conj(tXb) * Zv - 1j * tXb.imag * Hbv, 1
        ),
        "curl_zeta": np.abs(
            curl_zeta - 0.25 * (trch * atrchb - trchb * atrch) - w * atrchb + wb * atrch - rho_dual
        ),
    }


def bianchi_P(bg: Background) -> dict[str, np.ndarray]:
    """Non-trivial Bianchi equations on Kerr: transport and angular derivatives of ``P``."""
    geo = bg.geometry
    rc = ricci_jets_closed_form(bg)
    P = P_closed_form(bg)
    Pv = P.value
    tX, tXb = rc.trX.value, rc.trXb.value
    dP = hgrad(geo, P).value
    dPc = hgrad(geo, P.conj()).value
    return {
        "nabla4_P": np.abs(geo.deriv(E4, P).value + 1.5 * tX * Pv),
        "nabla3_P": np.abs(geo.deriv(E3, P).value + 1.5 * np.conj(tXb) * Pv),
        "D_Pbar": _norm(cD(dPc) + 3 * np.conj(Pv) * rc.H.value, 1),
        "D_P": _norm(cD(dP) + 3 * Pv * rc.Hb.value, 1),
    }


# ---------------------------------------------------------- conformal change
def conformal_lambda(bg: Background) -> Jet:
    """The test rescaling ``lambda = exp(0.1 sin(r) cos(theta))``."""
    return jets.exp(jets.sin(bg.r) * jets.cos(bg.theta) * 0.1)


def conformal_rescale(bg: Background, lam: Jet | None = None) -> dict[str, np.ndarray]:
    """Transformation laws of the coefficients under ``e3 -> e3/lam``, ``e4 -> lam e4``."""
    lam = conformal_lambda(bg) if lam is None else lam
    geo = bg.geometry
    geo2 = geo.rescaled(lam)
    old = ricci_jets_from_frame(geo)
    new = ricci_jets_from_frame(geo2)
    lv = lam.value
    loglam = jets.log(lam)
    e3l = geo.deriv(E3, loglam).value
    e4l = geo.deriv(E4, loglam).value
    grad_l = hgrad(geo, loglam).value
    c_old = curv_values_from_riemann(geo)
    c_new = curv_values_from_riemann(geo2)
    v = lambda j: j.value
    return {
        "trch": np.abs(v(new.trch) - lv * v(old.trch)),
        "atrch": np.abs(v(new.atrch) - lv * v(old.atrch)),
        "trchb": np.abs(v(new.trchb) - v(old.trchb) / lv),
        "atrchb": np.abs(v(new.atrchb) - v(old.atrchb) / lv),
        "xi": _norm(v(new.xi) - lv * v(old.xi), 1),
        "xib": _norm(v(new.xib) - v(old.xib) / lv, 1),
        "eta": _norm(v(new.eta) - v(old.eta), 1),
        "etab": _norm(v(new.etab) - v(old.etab), 1),
        "zeta": _norm(v(new.zeta) - (v(old.zeta) - grad_l), 1),
        "omega": np.abs(v(new.omega) - lv * (v(old.omega) - 0.5 * e4l)),
        "omegab": np.abs(v(new.omegab) - (v(old.omegab) + 0.5 * e3l) / lv),
        "trX": np.abs(v(new.trX) - lv * v(old.trX)),
        "P": np.abs(c_new.P - c_old.P),
        "B": np.abs(c_new.B.F1 - lv * c_old.B.F1),
        "A": np.abs(c_new.A.U11 - lv**2 * c_old.A.U11),
    }
