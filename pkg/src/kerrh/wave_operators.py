"""Wave-type operators on Kerr: the tensor wave operator, the Teukolsky operator,
the Chandrasekhar transform and the scalar identities behind the spin-2 projection.

Operators act on field jets from :mod:`kerrh.hcalculus` and return point values
(``numpy`` arrays whose last axis runs over the sample points).  Identities are
returned as :class:`~kerrh.hcalculus.CommResult` objects holding both sides, so
that absolute and relative residuals are computed the same way everywhere.

Several identities are evaluated by two independent routes:

* the tensor wave operator directly from its definition
  ``g^{AB} (D_A D_B - Gamma_{AB}^C D_C)`` versus its null-frame canonical forms;
* the Boyer-Lindquist scalar wave operator versus its frame form;
* closed-form polynomial potentials versus combinations of connection coefficients
  obtained by differentiating the frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DivisionNearZero, UnknownQuantity
from .hcalculus import (
    CommResult,
    DD_dot,
    DD_hot,
    DDbar_dot,
    SField,
    _vecdot,
    coeff_values,
    complex_grad,
    conf_DD_hot,
    conf_DDbar_dot,
    conf_grad,
    conf_nabla4,
    grad,
    laplacian,
    nabla3,
    nabla4,
    ricci,
)
from .htensor_algebra import hot1, ldual2, wedge1
from .jets import Jet
from .kerr_background import E1, E2, E3, E4, FRAME_METRIC_INV, Background, FrameGeometry

# ---------------------------------------------------------------- conventions
#: Sign conventions the operators depend on; each has a canary test.
CONVENTIONS = {
    "orientation": "eps_12 = +1 for the ordered pair (e1, e2); left dual (*u)_a = eps_ab u_b",
    "anti_self_dual": "*U = -i U for U in S2(C); first row (c, -i c), second row (-i c, -c)",
    "hot_half": "(x hot y)_ab = 1/2 (x_a y_b + x_b y_a - delta_ab x.y)",
    "complex_derivative": "D_a = nabla_a + i eps_ab nabla_b, derivative index leading",
    "box_signature": "g(e3, e4) = -2, so box = -1/2 (e3 e4 + e4 e3) + ... on scalars",
    "weyl": "rho = R_3434 / 4, *rho = R_1234 / 2, P = rho + i *rho = -2m/q^3",
}


def _vals(x) -> np.ndarray:
    return x.value if isinstance(x, Jet) else np.asarray(x)


def _contract_grad(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``x_c g_{c...}`` for a gradient with the derivative index leading."""
    return np.einsum("cz,c...z->...z", x, g)


# ------------------------------------------------------- tensor wave operator
def first_derivs(geo: FrameGeometry, U: Jet) -> list[Jet]:
    """Projected derivatives ``(D_A U)`` for ``A = e1, e2, e3, e4``."""
    return [geo.hderiv(A, U) for A in range(4)]


def second_derivs(geo: FrameGeometry, U: Jet) -> list[list[Jet]]:
    """Second projected covariant derivatives ``S[A][B] = (D^2 U)(e_A, e_B)``.

    ``S[A][B] = D_A (D_B U) - Gamma_{AB}^C D_C U`` with
    ``Gamma_{AB}^C = conn[A, B, D] g^{DC}``.
    """
    first = first_derivs(geo, U)
    conn = geo.conn
    out = []
    for A in range(4):
        row = []
        for B in range(4):
            term = geo.hderiv(A, first[B])
            for C in range(4):
                gam = sum(conn[A, B, D] * FRAME_METRIC_INV[D, C] for D in range(4) if FRAME_METRIC_INV[D, C])
                term = term - gam * first[C]
            row.append(term)
        out.append(row)
    return out


def box_dot(geo: FrameGeometry, U: Jet) -> np.ndarray:
    """``g^{AB} S[A][B]``: the horizontal-tensor wave operator from its definition."""
    S = second_derivs(geo, U)
    out = 0.0
    for A in range(4):
        for B in range(4):
            if FRAME_METRIC_INV[A, B]:
                out = out + FRAME_METRIC_INV[A, B] * S[A][B].value
    return out


def box2_canonical(geo: FrameGeometry, Psi: Jet, form: str = "item3") -> np.ndarray:
    """Null-frame forms of the wave operator on ``S2`` tensors.

    ``item1``: symmetrised ``-1/2 (nabla_3 nabla_4 + nabla_4 nabla_3)`` form;
    ``item3``: ``-nabla_4 nabla_3`` form whose zeroth-order term is
    ``-2 (*rho - eta wedge etab) *Psi``; the wedge part comes from the
    ``hot(eta, etab . Psi)`` terms of ``[nabla_3, nabla_4]``, which equal
    ``(eta wedge etab) *Psi`` on symmetric traceless tensors;
    ``item3_uncorrected``: the same form with ``-2 *rho *Psi`` alone (canary);
    ``item1_derived``: the symmetrised form with ``omegab`` in place of ``omega``
    in front of ``nabla_3`` (canary).
    """
    c = coeff_values(geo)
    P0 = Psi.value
    n3, n4 = nabla3(geo, Psi), nabla4(geo, Psi)
    n3v, n4v = n3.value, n4.value
    lap = laplacian(geo, Psi).value
    g = grad(geo, Psi).value
    if form in ("item1", "item1_derived"):
        w3 = c.omega if form == "item1" else c.omegab
        return (
            -0.5 * (nabla3(geo, n4).value + nabla4(geo, n3).value)
            + lap
            + (c.omegab - 0.5 * c.trchb) * n4v
            + (w3 - 0.5 * c.trch) * n3v
            + _contract_grad(c.eta + c.etab, g)
        )
    if form in ("item3", "item3_uncorrected"):
        k = c.rho_dual - (wedge1(c.eta, c.etab) if form == "item3" else 0.0)
        return (
            -nabla4(geo, n3).value
            + lap
            + (2 * c.omega - 0.5 * c.trch) * n3v
            - 0.5 * c.trchb * n4v
            + 2 * _contract_grad(c.etab, g)
            - 2 * k * ldual2(P0)
        )
    raise UnknownQuantity(f"unknown canonical form {form!r}")


def _angular_complex(c, Psi: Jet, geo: FrameGeometry, dgrad: np.ndarray | None = None) -> np.ndarray:
    """``1/2 (Hb . Dbar) Psi + 1/2 (conj(Hb) . D) Psi`` from gradient data."""
    dg = grad(geo, Psi) if dgrad is None else dgrad
    Dbar = complex_grad(dg, -1.0).value
    D = complex_grad(dg).value
    return 0.5 * _contract_grad(c.Hb, Dbar) + 0.5 * _contract_grad(np.conj(c.Hb), D)


def box2_zeroth(geo: FrameGeometry, variant: str = "") -> np.ndarray:
    """Zeroth-order coefficient of the complex form.

    Default: ``-1/4 trX conj(trXb) - 1/4 trXb conj(trX) - 2 conj(P) - 2i eta wedge etab``.
    ``as_derived`` drops the wedge term; ``uncorrected`` also replaces
    ``conj(P)`` by ``P``.  Both variants are canaries.
    """
    c = coeff_values(geo)
    base = -0.25 * c.trX * np.conj(c.trXb) - 0.25 * c.trXb * np.conj(c.trX)
    if variant == "uncorrected":
        return base - 2 * c.P
    if variant == "as_derived":
        return base - 2 * np.conj(c.P)
    if variant:
        raise UnknownQuantity(f"unknown variant {variant!r}")
    return base - 2 * np.conj(c.P) - 2j * wedge1(c.eta, c.etab)


def box2_complex(geo: FrameGeometry, Psi: Jet, variant: str = "") -> np.ndarray:
    """Complex form of the wave operator for anti-self-dual ``Psi``."""
    c = coeff_values(geo)
    n3 = nabla3(geo, Psi)
    return (
        -nabla4(geo, n3).value
        + 0.5 * DD_hot(geo, DDbar_dot(geo, Psi)).value
        + (2 * c.omega - 0.5 * c.trX) * n3.value
        - 0.5 * c.trXb * nabla4(geo, Psi).value
        + _angular_complex(c, Psi, geo)
        + box2_zeroth(geo, variant) * Psi.value
    )


def box2_conformal(geo: FrameGeometry, Psi: Jet, variant: str = "") -> np.ndarray:
    """Conformal (signature 0) form of the complex wave operator."""
    c = coeff_values(geo)
    A = SField(Psi, 0)
    c3 = A.c3(geo)
    cg = conf_grad(geo, Psi, 0)
    Dbar = complex_grad(cg, -1.0).value
    D = complex_grad(cg).value
    return (
        -c3.c4(geo).jet.value
        + 0.5 * conf_DD_hot(geo, conf_DDbar_dot(geo, Psi, 0), 0).value
        - 0.5 * c.trXb * A.c4(geo).jet.value
        - 0.5 * c.trX * c3.jet.value
        + 0.5 * _contract_grad(c.Hb, Dbar)
        + 0.5 * _contract_grad(np.conj(c.Hb), D)
        + box2_zeroth(geo, variant) * Psi.value
    )


def box2(geo: FrameGeometry, Psi: Jet, route: str = "direct", variant: str = "") -> np.ndarray:
    """The wave operator on ``S2`` tensors by the requested route."""
    if route == "direct":
        return box_dot(geo, Psi)
    if route in ("item1", "item3", "item1_derived", "item3_uncorrected"):
        return box2_canonical(geo, Psi, route)
    if route == "complex":
        return box2_complex(geo, Psi, variant)
    if route == "conformal":
        return box2_conformal(geo, Psi, variant)
    raise UnknownQuantity(f"unknown route {route!r}")


def box2_equivalence(geo: FrameGeometry, Psi: Jet, route: str, variant: str = "") -> CommResult:
    """Direct definition against one of the null-frame forms."""
    return CommResult(box_dot(geo, Psi), box2(geo, Psi, route, variant), 2)


def commutator_34_uncorrected(geo: FrameGeometry, Psi: Jet) -> CommResult:
    """``[nabla_3, nabla_4] Psi`` against the form with only ``*rho``, ``omega``, ``eta`` terms."""
    c = coeff_values(geo)
    n3, n4 = nabla3(geo, Psi), nabla4(geo, Psi)
    lhs = nabla3(geo, n4).value - nabla4(geo, n3).value
    rhs = (
        4 * c.rho_dual * ldual2(Psi.value)
        - 2 * c.omega * n3.value
        + 2 * c.omegab * n4.value
        - 2 * _contract_grad(c.etab - c.eta, grad(geo, Psi).value)
    )
    return CommResult(lhs, rhs, 2)


def dd_hot_ddbar_identity(geo: FrameGeometry, Psi: Jet) -> CommResult:
    """``D hot (Dbar . Psi)`` against ``2 Lap Psi - i (atrchi nabla_3 + atrchib nabla_4) Psi + ...``."""
    c = coeff_values(geo)
    lhs = DD_hot(geo, DDbar_dot(geo, Psi)).value
    zeroth = 0.5 * c.trX * np.conj(c.trXb) + 0.5 * c.trXb * np.conj(c.trX) + 2 * c.P + 2 * np.conj(c.P)
    rhs = (
        2 * laplacian(geo, Psi).value
        - 1j * (c.atrch * nabla3(geo, Psi).value + c.atrchb * nabla4(geo, Psi).value)
        + zeroth * Psi.value
    )
    return CommResult(lhs, rhs, 2)


def gauss_s2_identity(geo: FrameGeometry, Psi: Jet) -> CommResult:
    """``(nabla_1 nabla_2 - nabla_2 nabla_1) Psi`` for anti-self-dual ``Psi``."""
    c = coeff_values(geo)
    hess = grad(geo, grad(geo, Psi)).value
    lhs = hess[0, 1] - hess[1, 0]
    zeroth = 0.25 * c.trX * np.conj(c.trXb) + 0.25 * c.trXb * np.conj(c.trX) + c.P + np.conj(c.P)
    rhs = 0.5 * (c.atrch * nabla3(geo, Psi).value + c.atrchb * nabla4(geo, Psi).value) + 1j * zeroth * Psi.value
    return CommResult(lhs, rhs, 2)


# --------------------------------------------------------- energy-momentum
def _hdot(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Full horizontal contraction ``X_ab Y_ab``."""
    return np.einsum("ab...,ab...->...", X, Y)


def emt(geo: FrameGeometry, Psi: Jet, V: Jet) -> np.ndarray:
    """Frame components ``Q[M, N]`` of the energy-momentum tensor of ``(Psi, V)``."""
    d = np.stack([f.value for f in first_derivs(geo, Psi)])
    db = np.conj(d)
    P0, v = Psi.value, V.value
    dd = np.einsum("Mab...,Nab...->MN...", d, db)
    lag = np.einsum("MN,MN...->...", FRAME_METRIC_INV, dd).real + v * _hdot(P0, np.conj(P0)).real
    G = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 0, -2.0], [0, 0, -2.0, 0]])
    return 0.5 * (dd + np.swapaxes(dd, 0, 1)) - 0.5 * G[..., None] * lag


def horizontal_curvature(geo: FrameGeometry, variant: str = "") -> np.ndarray:
    """``K[a, c, M, N] = g(Rdot(e_M, e_N) e_a, e_c)`` for the projected connection.

    The default adds to the spacetime curvature the product of the components
    of ``D e_a`` leaving the horizontal plane; ``variant="spacetime"`` returns the
    spacetime curvature alone.
    """
    R4 = geo.riemann
    K = np.einsum("caMNz->acMNz", R4[:2, :2])
    if variant == "spacetime":
        return K
    cv = geo.conn.value
    out = cv[:, :2, 2:]  # conn[Y, a, P]
    corr = np.einsum("YaPz,PQ,XcQz->acXYz", out, FRAME_METRIC_INV[2:, 2:], out)
    return K + corr - np.einsum("acXYz->acYXz", corr)


def _curv_action(K: np.ndarray, U: np.ndarray, M: int, N: int) -> np.ndarray:
    """``-(K_a^c U_cb + K_b^c U_ac)`` for the pair ``(M, N)``: the commutator on a covariant 2-tensor."""
    k = K[:, :, M, N]
    return -(np.einsum("acz,cbz->abz", k, U) + np.einsum("bcz,acz->abz", k, U))


def curvature_commutator(geo: FrameGeometry, Psi: Jet, variant: str = "") -> CommResult:
    """``(D_M D_N - D_N D_M) Psi`` from second derivatives against the curvature action."""
    S = second_derivs(geo, Psi)
    K = horizontal_curvature(geo, variant)
    P0 = Psi.value
    lhs = np.stack([np.stack([S[M][N].value - S[N][M].value for N in range(4)]) for M in range(4)])
    rhs = np.stack([np.stack([_curv_action(K, P0, M, N) for N in range(4)]) for M in range(4)])
    return CommResult(lhs, rhs, 6)  # 4 x 4 x 2 x 2 = 2**6 components


def emt_divergence_residual(geo: FrameGeometry, Psi: Jet, V: Jet, variant: str = "") -> CommResult:
    """Divergence of the energy-momentum tensor: product-rule expansion against the closed form.

    The left side differentiates each factor of ``Q`` separately using second
    projected derivatives (jets of order two suffice); the right side is the
    stated formula with the wave operator, the potential and the curvature
    coupling.  ``variant="spacetime"`` uses the spacetime curvature in the
    coupling term.
    """
    S = second_derivs(geo, Psi)
    Sv = np.stack([np.stack([S[A][B].value for B in range(4)]) for A in range(4)])
    Sb = np.conj(Sv)
    d = np.stack([f.value for f in first_derivs(geo, Psi)])
    db = np.conj(d)
    P0 = Psi.value
    Pb = np.conj(P0)
    v = V.value
    dV = np.stack([geo.deriv(A, V).value for A in range(4)])
    gi = FRAME_METRIC_INV
    # D^N Q_MN = g^{NK} D_K Q_MN
    lhs = []
    rhs = []
    box = np.einsum("AB,AB...->...", gi, Sv)
    boxb = np.conj(box)
    K = horizontal_curvature(geo, variant)
    for M in range(4):
        t = 0.0
        for N in range(4):
            for Kx in range(4):
                if not gi[N, Kx]:
                    continue
                t = t + 0.5 * gi[N, Kx] * (
                    _hdot(Sv[Kx, M], db[N]) + _hdot(d[M], Sb[Kx, N])
                    + _hdot(Sb[Kx, M], d[N]) + _hdot(db[M], Sv[Kx, N])
                )
        # -1/2 D_M (D_L Psi . D^L Psibar + V |Psi|^2)
        dlag = 0.0
        for L in range(4):
            for Kx in range(4):
                if gi[L, Kx]:
                    dlag = dlag + gi[L, Kx] * (_hdot(Sv[M, L], db[Kx]) + _hdot(d[L], Sb[M, Kx]))
        dlag = dlag + dV[M] * _hdot(P0, Pb) + v * (_hdot(d[M], Pb) + _hdot(P0, db[M]))
        lhs.append(t - 0.5 * dlag)
        r = 0.5 * _hdot(d[M], boxb - v * Pb) + 0.5 * _hdot(db[M], box - v * P0)
        for N in range(4):
            for Kx in range(4):
                if gi[N, Kx]:
                    r = r + 0.5 * gi[N, Kx] * (
                        _hdot(db[Kx], _curv_action(K, P0, N, M)) + _hdot(d[Kx], _curv_action(K, Pb, N, M))
                    )
        rhs.append(r - 0.5 * dV[M] * _hdot(P0, Pb))
    return CommResult(np.stack(lhs), np.stack(rhs), 2)  # four frame components


# ------------------------------------------------------------ Teukolsky operator
@dataclass
class TeukolskyCoeffs:
    """Coefficients of the Teukolsky operator at the sample points.

    The operator reads ``principal_43 (c)nabla_4 (c)nabla_3 A
    + principal_dd (c)D hot ((c)Dbar . A) + c3 (c)nabla_3 A + c4 (c)nabla_4 A
    + angular . (c)nabla A + zeroth A + coupling hot (conj(Hb) . A)``.
    """

    principal_43: np.ndarray
    principal_dd: np.ndarray
    c3: np.ndarray
    c4: np.ndarray
    angular: np.ndarray
    zeroth: np.ndarray
    coupling: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "principal_43": self.principal_43,
            "principal_dd": self.principal_dd,
            "c3": self.c3,
            "c4": self.c4,
            "angular_1": self.angular[0],
            "angular_2": self.angular[1],
            "zeroth": self.zeroth,
            "coupling_1": self.coupling[0],
            "coupling_2": self.coupling[1],
        }


def teukolsky_coeffs(geo: FrameGeometry) -> TeukolskyCoeffs:
    c = coeff_values(geo)
    ones = np.ones(geo.npts, dtype=complex)
    return TeukolskyCoeffs(
        principal_43=-ones,
        principal_dd=0.5 * ones,
        c3=-0.5 * c.trX - 2 * np.conj(c.trX),
        c4=-0.5 * c.trXb,
        angular=4 * c.H + c.Hb + np.conj(c.Hb),
        zeroth=-np.conj(c.trX) * c.trXb + 2 * np.conj(c.P),
        coupling=2 * c.H,
    )


def teukolsky_L(geo: FrameGeometry, A: Jet, form: str = "intro") -> np.ndarray:
    """The Teukolsky operator on a signature-2 anti-self-dual field ``A``.

    ``form="intro"`` writes the angular term as ``(4H + Hb + conj(Hb)) . (c)nabla A``;
    ``form="split"`` as ``1/2 conj(Hb) . (c)D A + (2H + 1/2 Hb) . (c)Dbar A``.
    """
    k = teukolsky_coeffs(geo)
    c = coeff_values(geo)
    sA = SField(A, 2)
    c3 = sA.c3(geo)
    cg = conf_grad(geo, A, 2)
    if form == "intro":
        ang = _contract_grad(k.angular, cg.value)
    elif form == "split":
        D = complex_grad(cg).value
        Dbar = complex_grad(cg, -1.0).value
        ang = 0.5 * _contract_grad(np.conj(c.Hb), D) + _contract_grad(2 * c.H + 0.5 * c.Hb, Dbar)
    else:
        raise UnknownQuantity(f"unknown Teukolsky form {form!r}")
    return (
        k.principal_43 * c3.c4(geo).jet.value
        + k.principal_dd * conf_DD_hot(geo, conf_DDbar_dot(geo, A, 2), 2).value
        + k.c3 * c3.jet.value
        + k.c4 * conf_nabla4(geo, A, 2).value
        + ang
        + k.zeroth * A.value
        + hot1(k.coupling, _vecdot(np.conj(c.Hb), A.value))
    )


def teukolsky_intermediate(geo: FrameGeometry, A: Jet) -> np.ndarray:
    """The Teukolsky operator rewritten with ordinary derivatives (principal frame, ``omega = 0``)."""
    c = coeff_values(geo)
    rc = ricci(geo)
    n3 = nabla3(geo, A)
    e4_wb = geo.deriv(E4, rc.omegab).value.real
    div_hbb = DD_dot(geo, rc.Hb.conj()).value
    Dbar = complex_grad(grad(geo, A), -1.0).value
    zeroth = (
        -np.conj(c.trX) * c.trXb
        + 2 * np.conj(c.P)
        + 2 * c.omegab * c.trX
        + 8 * c.omegab * np.conj(c.trX)
        + 4 * e4_wb
        - div_hbb
        - 4 * np.einsum("a...,a...->...", c.H, np.conj(c.Hb))
    )
    return (
        -nabla4(geo, n3).value
        + 0.5 * DD_hot(geo, DDbar_dot(geo, A)).value
        + (-2.5 * c.trch - 1.5j * c.atrch) * n3.value
        + (-0.5 * c.trchb + 4 * c.omegab + 0.5j * c.atrchb) * nabla4(geo, A).value
        - 2 * _contract_grad(c.etab, grad(geo, A).value)
        + 2 * _contract_grad(c.H, Dbar)
        + zeroth * A.value
        + hot1(2 * c.H, _vecdot(np.conj(c.Hb), A.value))
    )


def teukolsky_forms(geo: FrameGeometry, A: Jet) -> dict[str, CommResult]:
    """The two angular forms against each other and against the intermediate form."""
    L = teukolsky_L(geo, A)
    return {
        "split": CommResult(L, teukolsky_L(geo, A, "split"), 2),
        "intermediate": CommResult(L, teukolsky_intermediate(geo, A), 2),
    }


def teukolsky_conformal(geo: FrameGeometry, A: Jet, lam: Jet) -> CommResult:
    """``L'(lam^2 A) = lam^2 L(A)`` in the frame rescaled by ``lam``."""
    geo2 = geo.rescaled(lam)
    lv = lam.value
    return CommResult(teukolsky_L(geo2, A * lam**2), lv**2 * teukolsky_L(geo, A), 2)


# ----------------------------------------------------------- scalar operators
def _bl_scalars(bg: Background) -> dict[str, np.ndarray]:
    r, th = bg.r0, bg.th0
    a, m = bg.a, bg.m
    delta = r * r - 2 * m * r + a * a
    return {
        "r": r,
        "sin": np.sin(th),
        "cos": np.cos(th),
        "cot": np.cos(th) / np.sin(th),
        "delta": delta,
        "q2": r * r + a * a * np.cos(th) ** 2,
        "a": a,
        "m": m,
    }


def scalar_box_g(bg: Background, psi: Jet) -> np.ndarray:
    """Boyer-Lindquist scalar wave operator ``box_g psi`` with ``partial_t -> -i om``, ``partial_phi -> i mp``."""
    geo = bg.geometry
    s = _bl_scalars(bg)
    r, a, m, d, sn = s["r"], s["a"], s["m"], s["delta"], s["sin"]
    cd = geo.coord_deriv
    T_, R_, TH_, PH_ = 0, 1, 2, 3
    psi_r, psi_th = cd(R_, psi), cd(TH_, psi)
    q2box = (
        d * cd(R_, psi_r).value
        + (-((r * r + a * a) ** 2) / d + a * a * sn**2) * cd(T_, cd(T_, psi)).value
        + cd(TH_, psi_th).value
        + (1 / sn**2 - a * a / d) * cd(PH_, cd(PH_, psi)).value
        - (4 * m * a * r / d) * cd(T_, cd(PH_, psi)).value
        + 2 * (r - m) * psi_r.value
        + s["cot"] * psi_th.value
    )
    return q2box / s["q2"]


def _lambda_jet(geo: FrameGeometry) -> Jet:
    """``Lambda = g(D_2 e1, e2)`` as a jet (principal frame: ``(r^2 + a^2) cot(theta) / |q|^3``)."""
    return geo.conn[E2, E1, E2]


def scalar_laplacian_frame(geo: FrameGeometry, f: Jet) -> np.ndarray:
    """``e1 e1 f + e2 e2 f + Lambda e1 f`` (principal frame)."""
    e = geo.deriv
    lam = _lambda_jet(geo).value
    return e(E1, e(E1, f)).value + e(E2, e(E2, f)).value + lam * e(E1, f).value


def scalar_box_frame(geo: FrameGeometry, f: Jet, form: str = "gks") -> np.ndarray:
    """Scalar wave operator from the null frame.

    ``gks``: ``-e4 e3 f - 1/2 trchb e4 f - 1/2 trch e3 f + Lap f + 2 etab . e f``
    (principal frame); ``general``: ``g^{AB} (e_A e_B - Gamma_{AB}^C e_C) f``.
    """
    if form == "general":
        return box_dot(geo, f)
    if form != "gks":
        raise UnknownQuantity(f"unknown scalar box form {form!r}")
    c = coeff_values(geo)
    e = geo.deriv
    return (
        -e(E4, e(E3, f)).value
        - 0.5 * c.trchb * e(E4, f).value
        - 0.5 * c.trch * e(E3, f).value
        + scalar_laplacian_frame(geo, f)
        + 2 * c.etab[0] * e(E1, f).value
        + 2 * c.etab[1] * e(E2, f).value
    )


def scalar_box_routes(bg: Background, f: Jet) -> dict[str, CommResult]:
    """Boyer-Lindquist operator against both frame routes."""
    geo = bg.geometry
    bl = scalar_box_g(bg, f)
    return {
        "gks": CommResult(bl, scalar_box_frame(geo, f, "gks"), 0),
        "general": CommResult(bl, scalar_box_frame(geo, f, "general"), 0),
    }


# -------------------------------------------------------------- potentials
@dataclass
class PotentialW:
    """Real and imaginary parts of the spin-2 potential together with ``Lambda``."""

    ReW: np.ndarray
    ImW: np.ndarray
    Lambda: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return self.ReW + 1j * self.ImW


@dataclass
class ProjectionScalars:
    """Frame scalars entering the potential: ``Lambda`` and a few first derivatives."""

    Lambda: np.ndarray
    e1_etab1: np.ndarray
    e1_etab2: np.ndarray
    e4_atrchb: np.ndarray
    e4_omegab: np.ndarray


def projection_scalars(geo: FrameGeometry) -> ProjectionScalars:
    rc = ricci(geo)
    e = geo.deriv
    return ProjectionScalars(
        Lambda=_lambda_jet(geo).value.real,
        e1_etab1=e(E1, rc.etab[0]).value.real,
        e1_etab2=e(E1, rc.etab[1]).value.real,
        e4_atrchb=e(E4, rc.atrchb).value.real,
        e4_omegab=e(E4, rc.omegab).value.real,
    )


def potential_w(bg: Background) -> PotentialW:
    """Closed-form potential from its polynomial ``|q|^6 W`` expressions."""
    s = _bl_scalars(bg)
    r, a, m, c, cot = s["r"], s["a"], s["m"], s["cos"], s["cot"]
    q6 = s["q2"] ** 3
    re = (
        (4 * cot**2 - 2) * r**4
        + (8 * cot**2 + 4 - 12 * c**2) * a * a * r * r
        - 8 * m * r * a * a * c**2
        + 4 * a**4 * cot**2
        - 6 * a**4 * c**4
    )
    im = a * c * (-12 * r**3 + 4 * m * r * r - 12 * r * a * a * c**2 + 12 * m * a * a * c**2)
    lam = (r * r + a * a) * cot / s["q2"] ** 1.5
    return PotentialW(re / q6, im / q6, lam)


def potential_w_frame(geo: FrameGeometry, variant: str = "") -> PotentialW:
    """The potential assembled from connection coefficients, curvature and frame derivatives.

    ``variant="uncorrected"`` uses the imaginary part in the form displayed next
    to the spin-2 wave equation (canary).
    """
    c = coeff_values(geo)
    s = projection_scalars(geo)
    L, (eb1, eb2), wb = s.Lambda, c.etab, c.omegab
    re = (
        4 * L**2
        + 0.5 * c.trch * c.trchb
        - 10 * wb * c.trch
        - 8 * c.rho
        - 2.5 * c.atrch * c.atrchb
        + 2 * s.e1_etab1
        - 6 * L * eb1
        + 8 * eb1**2
        - 16 * eb2**2
    )
    if variant == "uncorrected":
        eta1, eta2 = c.eta
        im = (
            c.atrch * c.trchb + c.atrchb * c.trch - 10 * wb * c.atrch
            + 3 * s.e1_etab2 + 15 * L * eb2 + 8 * eta1 * eta2
        )
    elif variant:
        raise UnknownQuantity(f"unknown variant {variant!r}")
    else:
        im = c.atrch * c.trchb + c.atrchb * c.trch - 10 * wb * c.atrch + 4 * c.rho_dual + 12 * L * eb2 - 8 * eb1 * eb2
    return PotentialW(re, im, L)


def potential_w_tilde(bg: Background) -> np.ndarray:
    """The potential through ``box_g (q / qbar)``: an independent route via the Boyer-Lindquist operator."""
    s = _bl_scalars(bg)
    r, a, m, c, sn, d, q2 = s["r"], s["a"], s["m"], s["cos"], s["sin"], s["delta"], s["q2"]
    ratio = bg.q / bg.q.conj()
    qb = r - 1j * a * c
    iac = 1j * a * c / q2
    inner = (
        4 * s["cot"] ** 2
        - 2
        + qb**2 * scalar_box_g(bg, ratio)
        - 4 * (r - m + d * iac) * (2 * iac)
        + 8 * r * r * a * a * sn**2 / q2**2
    )
    return inner / q2


def potential_w_identities(bg: Background, variant: str = "") -> dict[str, CommResult]:
    """``|q|^6 ReW`` and ``|q|^6 ImW``: polynomial against frame route, and ``W`` against the ``box_g`` route."""
    q6 = _bl_scalars(bg)["q2"] ** 3
    poly = potential_w(bg)
    frame = potential_w_frame(bg.geometry, variant)
    return {
        "ReW": CommResult(q6 * poly.ReW, q6 * frame.ReW, 0),
        "ImW": CommResult(q6 * poly.ImW, q6 * frame.ImW, 0),
        "W_box": CommResult(poly.W, potential_w_tilde(bg), 0),
    }


# ------------------------------------------------------ the spin-2 projection
def spin2_field(a_jet: Jet) -> Jet:
    """Anti-self-dual tensor with ``A_11 = a``."""
    return jets.stack([jets.stack([a_jet, a_jet * -1j]), jets.stack([a_jet * -1j, a_jet * -1.0])])


def wave_a_rhs(geo: FrameGeometry, a_jet: Jet, W: np.ndarray) -> np.ndarray:
    """First- and zeroth-order terms of the wave equation for the projected scalar ``a``."""
    c = coeff_values(geo)
    e = geo.deriv
    L = _lambda_jet(geo).value.real
    eb1, eb2 = c.etab
    return (
        (-4 * c.omegab + 1j * c.atrchb) * e(E4, a_jet).value
        + (2 * c.trch + 3j * c.atrch) * e(E3, a_jet).value
        + 4j * eb2 * e(E1, a_jet).value
        + (8 * eb2 - 4j * (L - eb1)) * e(E2, a_jet).value
        + W * a_jet.value
    )


def projection_lemma_residuals(bg: Background, A: Jet) -> dict[str, CommResult]:
    """The six 11-component projections (principal frame) for an anti-self-dual ``A``."""
    geo = bg.geometry
    c = coeff_values(geo)
    rc = ricci(geo)
    e = geo.deriv
    a = A[0, 0]
    av = a.value
    L = _lambda_jet(geo).value.real
    eb1, eb2 = c.etab
    e1a, e2a, e3a, e4a = (e(k, a).value for k in (E1, E2, E3, E4))
    n3 = nabla3(geo, A)
    G0 = 0.5 * c.trch * c.trchb + 0.5 * c.atrch * c.atrchb + 2 * c.rho
    e4_atrchb = e(E4, rc.atrchb).value.real
    lap = scalar_laplacian_frame(geo, a)
    Dbar = complex_grad(grad(geo, A), -1.0).value
    return {
        "nabla3": CommResult(n3.value[0, 0], e3a + 1j * c.atrchb * av, 0),
        "nabla4": CommResult(nabla4(geo, A).value[0, 0], e4a + 1j * c.atrch * av, 0),
        "nabla4_nabla3": CommResult(
            nabla4(geo, n3).value[0, 0],
            e(E4, e(E3, a)).value
            + 1j * c.atrchb * e4a
            + 1j * c.atrch * e3a
            + (-c.atrch * c.atrchb + 1j * e4_atrchb) * av,
            0,
        ),
        "dd_hot_ddbar": CommResult(
            0.5 * DD_hot(geo, DDbar_dot(geo, A)).value[0, 0],
            lap
            - 0.5j * c.atrch * e3a
            - 0.5j * c.atrchb * e4a
            + 4j * L * e2a
            + (-4 * L**2 + c.atrch * c.atrchb + G0) * av,
            0,
        ),
        "etab_grad": CommResult(
            2 * _contract_grad(c.etab, grad(geo, A).value)[0, 0],
            2 * eb1 * e1a + 2 * eb2 * e2a + 4j * L * eb2 * av,
            0,
        ),
        "H_Dbar": CommResult(
            2 * _contract_grad(c.H, Dbar)[0, 0],
            4 * (eb1 - 1j * eb2) * e1a - 4 * (eb2 + 1j * eb1) * e2a + 8 * (L * eb1 - 1j * L * eb2) * av,
            0,
        ),
    }


def teukolsky_projection(bg: Background, A: Jet) -> CommResult:
    """``L(A)_11`` against ``box a - (wave-a right side)`` with the closed-form potential."""
    geo = bg.geometry
    a = A[0, 0]
    W = potential_w(bg).W
    return CommResult(teukolsky_L(geo, A)[0, 0], scalar_box_g(bg, a) - wave_a_rhs(geo, a, W), 0)


def classical_teukolsky(bg: Background, alpha: Jet) -> np.ndarray:
    """Boyer-Lindquist Teukolsky operator (spin +2) applied to ``alpha``."""
    geo = bg.geometry
    s = _bl_scalars(bg)
    r, a, m, c, sn, d = s["r"], s["a"], s["m"], s["cos"], s["sin"], s["delta"]
    cd = geo.coord_deriv
    return (
        s["q2"] * scalar_box_g(bg, alpha)
        + 4 * (r - m) * cd(1, alpha).value
        + 4 * (m * (r * r - a * a) / d - r - 1j * a * c) * cd(0, alpha).value
        + 4 * (a * (r - m) / d + 1j * c / sn**2) * cd(3, alpha).value
        - (4 * s["cot"] ** 2 - 2) * alpha.value
    )


def classical_teukolsky_residual(bg: Background, a_jet: Jet) -> CommResult:
    """``|q|^2 (box a - rhs(a))`` against ``-(q/qbar) T(alpha)`` with ``alpha = -(qbar/q) a``."""
    geo = bg.geometry
    q, qb = bg.q, bg.q.conj()
    alpha = a_jet * (qb / q) * -1.0
    W = potential_w(bg).W
    q2 = _bl_scalars(bg)["q2"]
    lhs = q2 * (scalar_box_g(bg, a_jet) - wave_a_rhs(geo, a_jet, W))
    rhs = -(q.value / qb.value) * classical_teukolsky(bg, alpha)
    return CommResult(lhs, rhs, 0)


def projection_wave_remainder(bg: Background, Psi: Jet) -> np.ndarray:
    """``(box2 Psi)_11 - box_g psi - i (4/|q|^2)(cos/sin^2) Z psi + (4 cot^2/|q|^2) psi`` with ``Z = partial_phi``."""
    geo = bg.geometry
    s = _bl_scalars(bg)
    psi = Psi[0, 0]
    zpsi = geo.coord_deriv(3, psi).value
    return (
        box_dot(geo, Psi)[0, 0]
        - scalar_box_g(bg, psi)
        - 1j * (4 / s["q2"]) * (s["cos"] / s["sin"] ** 2) * zpsi
        + (4 * s["cot"] ** 2 / s["q2"]) * psi.value
    )


def remainder_over_psi(bg: Background, Psi: Jet, threshold: float = 1e-10, strict: bool = False) -> np.ndarray:
    """``R(Psi) / psi`` pointwise; points with ``|psi| < threshold`` give ``nan`` (or raise when ``strict``)."""
    psi = Psi.value[0, 0]
    small = np.abs(psi) < threshold
    if strict and small.any():
        raise DivisionNearZero(f"|psi| below {threshold} at {int(small.sum())} sample point(s)")
    R = projection_wave_remainder(bg, Psi)
    out = np.full(R.shape, np.nan, dtype=complex)
    out[~small] = R[~small] / psi[~small]
    return out


def remainder_closed_form(bg: Background) -> np.ndarray:
    """``R(Psi) / psi = atrch atrchb - 4 Lambda^2 + 4 cot^2 / |q|^2 = -4 a^2 cos^2 (|q|^2 + 2 m r) / |q|^6``."""
    s = _bl_scalars(bg)
    return -4 * s["a"] ** 2 * s["cos"] ** 2 * (s["q2"] + 2 * s["m"] * s["r"]) / s["q2"] ** 3


def remainder_identity(bg: Background, Psi: Jet) -> CommResult:
    """``(box2 Psi)_11`` against its scalar reduction with the closed-form remainder."""
    geo = bg.geometry
    s = _bl_scalars(bg)
    psi = Psi[0, 0]
    rhs = (
        scalar_box_g(bg, psi)
        + 1j * (4 / s["q2"]) * (s["cos"] / s["sin"] ** 2) * geo.coord_deriv(3, psi).value
        + (remainder_closed_form(bg) - 4 * s["cot"] ** 2 / s["q2"]) * psi.value
    )
    return CommResult(box_dot(geo, Psi)[0, 0], rhs, 0)


def remainder_linearity(bg_lo: Background, bg_hi: Background, Psi_lo: Jet, Psi_hi: Jet) -> CommResult:
    """``R/psi`` at spin ``a_hi`` against ``(a_hi / a_lo)`` times ``R/psi`` at ``a_lo`` (same points)."""
    ratio = bg_hi.a / bg_lo.a
    return CommResult(remainder_over_psi(bg_hi, Psi_hi), ratio * remainder_over_psi(bg_lo, Psi_lo), 0)


def constant_field_box(bg: Background, psi0: complex = 1.0) -> CommResult:
    """Frame-constant anti-self-dual field on a static background point set: ``(box2 Psi)_11 = -4 cot^2 / r^2 psi0``.

    Valid at ``a = 0``; the constant frame components still feel the rotation
    coefficient ``Lambda`` of the horizontal frame, so derivative terms do not drop.
    """
    s = _bl_scalars(bg)
    one = Jet.const(psi0, bg.npts, bg.order)
    Psi = spin2_field(one)
    return CommResult(box_dot(bg.geometry, Psi)[0, 0], -4 * s["cot"] ** 2 / s["r"] ** 2 * psi0, 0)


# ------------------------------------------------- Chandrasekhar transformation
@dataclass
class ChandraCoeffs:
    """Coefficients of ``Q(A) = (c)nabla_3 (c)nabla_3 A + C (c)nabla_3 A + D A`` as jets."""

    C: Jet
    D: Jet
    f_free: float = 0.0


def chandra_coeffs(geo: FrameGeometry, f_free: float = 0.0, c_imag: float = -4.0) -> ChandraCoeffs:
    """``C = 2 trchb + i c_imag atrchb`` (default ``-4``), ``D = 1/2 trchb^2 + f atrchb^2 - 2i trchb atrchb``."""
    rc = ricci(geo)
    tb, ab = rc.trchb, rc.atrchb
    C = tb * 2.0 + ab * (1j * c_imag)
    D = tb * tb * 0.5 + ab * ab * f_free - tb * ab * 2j
    return ChandraCoeffs(C, D, f_free)


def chandra_Q(geo: FrameGeometry, A: Jet, coeffs: ChandraCoeffs | None = None) -> np.ndarray:
    """``Q(A)`` for a signature-2 field ``A``."""
    k = chandra_coeffs(geo) if coeffs is None else coeffs
    c3 = SField(A, 2).c3(geo)
    return c3.c3(geo).jet.value + k.C.value * c3.jet.value + k.D.value * A.value


def qf(bg: Background, A: Jet, f_free: float = 0.0, geo: FrameGeometry | None = None) -> np.ndarray:
    """``q qbar^3 Q(A)``."""
    geo = bg.geometry if geo is None else geo
    q = bg.q.value
    return q * np.conj(q) ** 3 * chandra_Q(geo, A, chandra_coeffs(geo, f_free))


def qf_rescale(bg: Background, A: Jet, lam: Jet, f_free: float = 0.0) -> CommResult:
    """``qf`` in the frame rescaled by ``lam`` with ``A -> lam^2 A`` against the original (type 0)."""
    geo2 = bg.geometry.rescaled(lam)
    return CommResult(qf(bg, A * lam**2, f_free, geo2), qf(bg, A, f_free), 2)


def transport_CD_residual(geo: FrameGeometry, f_free: float = 0.0, c_imag: float = -4.0) -> dict[str, CommResult]:
    """Transport equations of ``C`` (signature -1) and ``D`` (signature -2) along ``e3``.

    ``(c)nabla_3 C + C/2 (trXb + conj trXb) - conj(trXb) trXb = 0`` and
    ``(c)nabla_3 D + D (trXb + conj trXb) - C/4 trXb conj(trXb) = 0`` on Kerr.
    """
    k = chandra_coeffs(geo, f_free, c_imag)
    rc = ricci(geo)
    wb = rc.omegab.value
    txb = rc.trXb.value
    Cv, Dv = k.C.value, k.D.value
    c3C = geo.deriv(E3, k.C).value + 2 * wb * Cv
    c3D = geo.deriv(E3, k.D).value + 4 * wb * Dv
    re2 = txb + np.conj(txb)
    nn = np.conj(txb) * txb
    return {
        "C": CommResult(c3C, -0.5 * Cv * re2 + nn, 0),
        "D": CommResult(c3D, -Dv * re2 + 0.25 * Cv * nn, 0),
    }


# ------------------------------------------------------ Regge-Wheeler scalar form
def rw_scalar_operator(bg: Background, psi: Jet) -> np.ndarray:
    """``box psi + (4i/|q|^2)(cos/sin^2 d_phi - a cos d_t) psi - (4/|q|^2)(cot^2 + 1 - 2m/r) psi``."""
    s = _bl_scalars(bg)
    cd = bg.geometry.coord_deriv
    first = s["cos"] / s["sin"] ** 2 * cd(3, psi).value - s["a"] * s["cos"] * cd(0, psi).value
    zeroth = -(4 / s["q2"]) * (s["cot"] ** 2 + 1 - 2 * s["m"] / s["r"])
    return scalar_box_g(bg, psi) + (4j / s["q2"]) * first + zeroth * psi.value


def rw_radial_coefficient(bg: Background) -> np.ndarray:
    """The non-angular zeroth-order coefficient ``-(4/|q|^2)(1 - 2m/r)``."""
    s = _bl_scalars(bg)
    return -(4 / s["q2"]) * (1 - 2 * s["m"] / s["r"])


def rw_schwarzschild_check(bg: Background) -> CommResult:
    """At ``a = 0`` the radial coefficient equals ``trch trchb``."""
    c = coeff_values(bg.geometry)
    return CommResult(rw_radial_coefficient(bg), c.trch * c.trchb, 0)
