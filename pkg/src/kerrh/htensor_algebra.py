"""Pointwise algebra of horizontal tensors in an orthonormal frame (e1, e2).

Values are numpy arrays whose *leading* axes are the horizontal component
indices; any trailing axes are sample axes, so every routine is vectorised
over batches of random inputs.  The orientation is ``eps[0, 1] = +1``.

Conventions worth keeping in mind:

* ``hot(x, y) = 1/2 (x_a y_b + x_b y_a - delta_ab x.y)`` carries the extra
  factor one half compared with the older Christodoulou-Klainerman
  convention.
* ``(x . U)_a = x_b U_ab`` and ``*x_a = eps_ab x_b``.
* An anti-self-dual 1-form is stored by ``F1`` with ``F2 = -i F1``; an
  anti-self-dual symmetric traceless 2-tensor by ``U11`` with
  ``U12 = U21 = -i U11`` and ``U22 = -U11``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])
DELTA = np.eye(2)


# ---------------------------------------------------------------- value types
@dataclass(frozen=True)
class HVecR:
    c1: np.ndarray
    c2: np.ndarray

    @property
    def arr(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(np.asarray(self.c1), np.asarray(self.c2)))

    @classmethod
    def of(cls, arr) -> HVecR:
        return cls(arr[0], arr[1])


@dataclass(frozen=True)
class H2TensorR:
    u11: np.ndarray
    u12: np.ndarray
    u21: np.ndarray
    u22: np.ndarray

    @property
    def arr(self) -> np.ndarray:
        u = np.broadcast_arrays(*(np.asarray(v) for v in (self.u11, self.u12, self.u21, self.u22)))
        return np.stack([np.stack([u[0], u[1]]), np.stack([u[2], u[3]])])

    @classmethod
    def of(cls, arr) -> H2TensorR:
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])


@dataclass(frozen=True)
class HSym2R:
    h11: np.ndarray
    h12: np.ndarray

    @property
    def arr(self) -> np.ndarray:
        h11, h12 = np.broadcast_arrays(np.asarray(self.h11), np.asarray(self.h12))
        return np.stack([np.stack([h11, h12]), np.stack([h12, -h11])])

    @classmethod
    def of(cls, arr) -> HSym2R:
        return cls(arr[0, 0], arr[0, 1])


@dataclass(frozen=True)
class HVecC:
    """Anti-self-dual complex 1-form; ``F2 = -i F1`` by construction."""

    F1: np.ndarray

    @property
    def F2(self) -> np.ndarray:
        return -1j * np.asarray(self.F1)

    @property
    def arr(self) -> np.ndarray:
        F1 = np.asarray(self.F1, dtype=complex)
        return np.stack([F1, -1j * F1])

    @classmethod
    def of(cls, arr) -> HVecC:
        return cls(np.asarray(arr[0], dtype=complex))

    def real_part(self) -> HVecR:
        a = self.arr.real
        return HVecR.of(a)


@dataclass(frozen=True)
class HSym2C:
    """Anti-self-dual complex symmetric traceless 2-tensor, stored by ``U11``."""

    U11: np.ndarray

    @property
    def U12(self) -> np.ndarray:
        return -1j * np.asarray(self.U11)

    @property
    def arr(self) -> np.ndarray:
        return sym2c_full(np.asarray(self.U11, dtype=complex))

    @classmethod
    def of(cls, arr) -> HSym2C:
        return cls(np.asarray(arr[0, 0], dtype=complex))

    def real_part(self) -> HSym2R:
        return HSym2R.of(self.arr.real)


def vecc_full(F1) -> np.ndarray:
    F1 = np.asarray(F1)
    return np.stack([F1, -1j * F1])


def sym2c_full(U11) -> np.ndarray:
    U11 = np.asarray(U11)
    off = -1j * U11
    return np.stack([np.stack([U11, off]), np.stack([off, -U11])])


# ------------------------------------------------------------ array primitives
def dual1(w: np.ndarray) -> np.ndarray:
    """``(*w)_a = eps_ab w_b``."""
    return np.einsum("ab,b...->a...", EPS, w)


def rdual1(w: np.ndarray) -> np.ndarray:
    """``(w*)_a = w_b eps_ba``."""
    return np.einsum("b...,ba->a...", w, EPS)


def ldual2(U: np.ndarray) -> np.ndarray:
    """``(*U)_ab = eps_ac U_cb``."""
    return np.einsum("ac,cb...->ab...", EPS, U)


def rdual2(U: np.ndarray) -> np.ndarray:
    """``(U*)_ab = U_ac eps_cb``."""
    return np.einsum("ac...,cb->ab...", U, EPS)


def dot1(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("a...,a...->...", x, y)


def wedge1(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("ab,a...,b...->...", EPS, x, y)


def hot1(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xy = np.einsum("a...,b...->ab...", x, y)
    return 0.5 * (xy + np.swapaxes(xy, 0, 1) - np.einsum("ab,...->ab...", DELTA, dot1(x, y)))


def vec_dot_2(x: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``(x . U)_a = x_b U_ab``."""
    return np.einsum("b...,ab...->a...", x, U)


def dot2(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.einsum("ab...,ab...->...", U, V)


def wedge2(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """``eps_ab U_ac V_cb``."""
    return np.einsum("ab,ac...,cb...->...", EPS, U, V)


def matmul2(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.einsum("ac...,cb...->ab...", U, V)


def tr(U: np.ndarray) -> np.ndarray:
    return np.einsum("aa...->...", U)


def atr(U: np.ndarray) -> np.ndarray:
    return np.einsum("ab,ab...->...", EPS, U)


def hat(U: np.ndarray) -> np.ndarray:
    sym = 0.5 * (U + np.swapaxes(U, 0, 1))
    return sym - 0.5 * np.einsum("ab,...->ab...", DELTA, tr(U))


def delta_times(s: np.ndarray) -> np.ndarray:
    return np.einsum("ab,...->ab...", DELTA, s)


def eps_times(s: np.ndarray) -> np.ndarray:
    return np.einsum("ab,...->ab...", EPS, s)


def _norm(x: np.ndarray, ncomp: int) -> np.ndarray:
    """Largest component modulus per sample."""
    flat = np.abs(x).reshape((2**ncomp, -1) if ncomp else (1, -1))
    return flat.max(axis=0)


# ------------------------------------------------------------- spec operations
def dual_vec(w: HVecR) -> HVecR:
    return HVecR.of(dual1(w.arr))


def dual_2t(U: H2TensorR) -> H2TensorR:
    return H2TensorR.of(ldual2(U.arr))


def right_dual_2t(U: H2TensorR) -> H2TensorR:
    return H2TensorR.of(rdual2(U.arr))


def decompose(U: H2TensorR) -> tuple[HSym2R, np.ndarray, np.ndarray, np.ndarray]:
    """Split ``U`` into its symmetric traceless part, trace, antitrace and antisymmetric coefficient.

    ``U = hat + 1/2 delta tr + 1/2 eps atr``; the last entry is ``1/2 atr``,
    the coefficient of ``eps`` in the antisymmetric part.
    """
    a = U.arr
    t, at = tr(a), atr(a)
    return HSym2R.of(hat(a)), t, at, 0.5 * at


def reassemble(h: HSym2R, trace, antitrace) -> H2TensorR:
    return H2TensorR.of(h.arr + 0.5 * delta_times(trace) + 0.5 * eps_times(antitrace))


def dot(x: HVecR, y: HVecR) -> np.ndarray:
    return dot1(x.arr, y.arr)


def wedge(x: HVecR, y: HVecR) -> np.ndarray:
    return wedge1(x.arr, y.arr)


def hot(x: HVecR, y: HVecR) -> HSym2R:
    return HSym2R.of(hot1(x.arr, y.arr))


def complexify_vec(f: HVecR) -> HVecC:
    """``F = f + i *f``."""
    a = f.arr
    return HVecC.of(a + 1j * dual1(a))


def complexify_sym2(u: HSym2R) -> HSym2C:
    """``U = u + i *u``."""
    a = u.arr
    return HSym2C.of(a + 1j * ldual2(a))


def dotC(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Bilinear (non-conjugating) contraction of complex 1-forms."""
    return dot1(F, G)


def hotC(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    return hot1(F, G)


def wedgeC(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    return wedge1(F, G)


# ------------------------------------------------------------- identity checks
def duals_identities(w: HVecR, U: H2TensorR, S: HSym2R) -> dict[str, np.ndarray]:
    """Residuals of the elementary duality relations for 1-forms and 2-tensors."""
    wa, Ua, Sa = w.arr, U.arr, S.arr
    t, at = tr(Ua), atr(Ua)
    return {
        "dual_dual_vec": _norm(dual1(dual1(wa)) + wa, 1),
        "left_right_vec": _norm(dual1(wa) + rdual1(wa), 1),
        "dual_dual_2t": _norm(ldual2(ldual2(Ua)) + Ua, 2),
        "sym_left_right": _norm(ldual2(Sa) + rdual2(Sa), 2),
        "dual_sym_traceless": np.maximum(
            _norm(ldual2(Sa) - np.swapaxes(ldual2(Sa), 0, 1), 2), np.abs(tr(ldual2(Sa)))
        ),
        "tr_dual": np.maximum(np.abs(tr(ldual2(Ua)) + at), np.abs(tr(rdual2(Ua)) + at)),
        "atr_dual": np.maximum(np.abs(atr(ldual2(Ua)) - t), np.abs(atr(rdual2(Ua)) - t)),
        "hat_dual": _norm(hat(ldual2(Ua)) - ldual2(hat(Ua)), 2),
        "right_dual_decomp": _norm(
            rdual2(Ua) + ldual2(Ua) - eps_times(t) + delta_times(at), 2
        ),
    }


def le_duals_identities(x: HVecR, y: HVecR, U: H2TensorR) -> dict[str, np.ndarray]:
    xa, ya, Ua = x.arr, y.arr, U.arr
    t, at = tr(Ua), atr(Ua)
    Ur = rdual2(Ua)
    xs = dual1(xa)
    lhs1 = np.einsum("a...,ab...->b...", xa, Ur)
    rhs1 = np.einsum("a...,ab...->b...", xs, Ua) - xs * t - xa * at
    lhs2 = np.einsum("a...,ab...->b...", xs, Ur)
    rhs2 = -np.einsum("a...,ab...->b...", xa, Ua) + xa * t - xs * at
    lhs3 = lhs2 - np.einsum("a...,ab...->b...", xa, Ua)
    rhs3 = -2 * np.einsum("a...,ab...->b...", xa, hat(Ua))
    return {
        "dual_dot_swap": np.maximum(
            np.abs(dot1(xs, ya) + dot1(xa, dual1(ya))), np.abs(dot1(xs, ya) - dot1(xa, rdual1(ya)))
        ),
        "vec_right_dual": _norm(lhs1 - rhs1, 1),
        "dualvec_right_dual": _norm(lhs2 - rhs2, 1),
        "dualvec_right_dual_minus": _norm(lhs3 - rhs3, 1),
    }


def sym_product_identity(u: HSym2R, v: HSym2R) -> np.ndarray:
    """Residual of ``u_ac v_cb + v_ac u_cb - delta_ab u.v``."""
    ua, va = u.arr, v.arr
    res = matmul2(ua, va) + matmul2(va, ua) - delta_times(dot2(ua, va))
    return _norm(res, 2)


def trace_identities(U: H2TensorR, V: H2TensorR) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residuals of the delta-contraction, eps-contraction and hat-of-product identities."""
    Ua, Va = U.arr, V.arr
    Uh, Vh = hat(Ua), hat(Va)
    tU, tV, aU, aV = tr(Ua), tr(Va), atr(Ua), atr(Va)
    UV = matmul2(Ua, Va)
    r1 = tr(UV) - (dot2(Uh, Vh) + 0.5 * (tU * tV - aU * aV))
    r2 = atr(UV) - (wedge2(Uh, Vh) + 0.5 * (aU * tV + tU * aV))
    r3 = hat(UV) - (0.5 * (Uh * tV + Vh * tU) + 0.5 * (-ldual2(Uh) * aV + ldual2(Vh) * aU))
    return np.abs(r1), np.abs(r2), _norm(r3, 2)


def special_products(U: H2TensorR) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The ``U = V`` specialisation of :func:`trace_identities`."""
    Ua = U.arr
    Uh, t, at = hat(Ua), tr(Ua), atr(Ua)
    UU = matmul2(Ua, Ua)
    r1 = tr(UU) - (dot2(Uh, Uh) + 0.5 * (t**2 - at**2))
    r2 = atr(UU) - t * at
    r3 = hat(UU) - t * Uh
    return np.abs(r1), np.abs(r2), _norm(r3, 2)


def nonsym_product_identity(u: H2TensorR, v: HSym2R) -> np.ndarray:
    ua, va = u.arr, v.arr
    lhs = matmul2(ua, va) + np.swapaxes(matmul2(ua, va), 0, 1)
    anti = ua - np.swapaxes(ua, 0, 1)
    extra = matmul2(anti, va)
    rhs = delta_times(dot2(ua, va)) + tr(ua) * va + 0.5 * (extra + np.swapaxes(extra, 0, 1))
    return _norm(lhs - rhs, 2)


def sym_contraction_identity(U: H2TensorR, x: HVecR) -> np.ndarray:
    """``U_ab x_b = (hat U . x + 1/2 tr U x + 1/2 atr U *x)_a`` for symmetric ``U``."""
    Ua = 0.5 * (U.arr + np.swapaxes(U.arr, 0, 1))
    xa = x.arr
    lhs = np.einsum("ab...,b...->a...", Ua, xa)
    rhs = vec_dot_2(xa, hat(Ua)) + 0.5 * tr(Ua) * xa + 0.5 * atr(Ua) * dual1(xa)
    return _norm(lhs - rhs, 1)


def dot_hot_identity(x: HVecR, y: HVecR, u: HSym2R) -> np.ndarray:
    """Residual of ``x hot (y.u) + y hot (x.u) - (x.y) u``."""
    xa, ya, ua = x.arr, y.arr, u.arr
    res = hot1(xa, vec_dot_2(ya, ua)) + hot1(ya, vec_dot_2(xa, ua)) - dot1(xa, ya) * ua
    return _norm(res, 2)


def useful_identities(x: HVecR, y: HVecR, U: HSym2R, V: HSym2R) -> dict[str, np.ndarray]:
    """The fifteen duality identities for 1-forms and symmetric traceless 2-tensors."""
    xa, ya, Ua, Va = x.arr, y.arr, U.arr, V.arr
    xs, ys, Us, Vs = dual1(xa), dual1(ya), ldual2(Ua), ldual2(Va)
    return {
        "sxi_dot_eta": np.abs(dot1(xs, ya) + dot1(xa, ys)),
        "sxi_dot_seta": np.abs(dot1(xs, ys) - dot1(xa, ya)),
        "sxi_wedge_eta": np.abs(wedge1(xs, ya) + wedge1(xa, ys)),
        "sxi_wedge_seta": np.abs(wedge1(xs, ys) - wedge1(xa, ya)),
        "sxi_hot_eta": _norm(hot1(xs, ya) - hot1(xa, ys), 2),
        "dual_of_hot": _norm(ldual2(hot1(xa, ya)) - hot1(xs, ya), 2),
        "sxi_hot_seta": _norm(hot1(xs, ys) + hot1(xa, ya), 2),
        "dual_of_xi_dot_U": _norm(dual1(vec_dot_2(xa, Ua)) - vec_dot_2(xa, Us), 1),
        "sxi_dot_U": _norm(vec_dot_2(xs, Ua) + vec_dot_2(xa, Us), 1),
        "sxi_dot_sU": _norm(vec_dot_2(xs, Us) - vec_dot_2(xa, Ua), 1),
        "sU_dot_V": np.abs(dot2(Us, Va) + dot2(Ua, Vs)),
        "sU_dot_sV": np.abs(dot2(Us, Vs) - dot2(Ua, Va)),
        "sU_wedge_V": np.abs(wedge2(Us, Va) + wedge2(Ua, Vs)),
        "sU_wedge_sV": np.abs(wedge2(Us, Vs) - wedge2(Ua, Va)),
        "sym_contraction": sym_contraction_identity(H2TensorR.of(Ua), x),
    }


def complexification_identities(
    x: HVecR, y: HVecR, u: HSym2R, v: HSym2R
) -> dict[str, np.ndarray]:
    """Algebraic part of the complexification lemma plus the simil-Leibniz identity."""
    xa, ya, ua, va = x.arr, y.arr, u.arr, v.arr
    X, Y = xa + 1j * dual1(xa), ya + 1j * dual1(ya)
    Uc, Vc = ua + 1j * ldual2(ua), va + 1j * ldual2(va)
    u_dot_y = vec_dot_2(ya, ua)
    return {
        "dot": np.abs(dot1(xa, ya) + 1j * dot1(dual1(xa), ya) - 0.5 * dotC(X, np.conj(Y))),
        "hot": _norm(hot1(xa, ya) + 1j * ldual2(hot1(xa, ya)) - 0.5 * hotC(X, Y), 2),
        "sym_dot_vec": _norm(
            u_dot_y + 1j * vec_dot_2(ya, ldual2(ua)) - 0.5 * vec_dot_2(np.conj(Y), Uc), 1
        ),
        "sym_dot_vec_dual": _norm(
            u_dot_y + 1j * dual1(u_dot_y) - 0.5 * vec_dot_2(np.conj(Y), Uc), 1
        ),
        "sym_dot_sym": np.abs(dot2(ua, va) + 1j * dot2(ldual2(ua), va) - 0.5 * dot2(Uc, np.conj(Vc))),
        "anti_self_dual_vec": _norm(dual1(X) + 1j * X, 1),
        "anti_self_dual_sym": _norm(ldual2(Uc) + 1j * Uc, 2),
    }


def simil_leibniz(E: HVecC, F: HVecC, U: HSym2C) -> np.ndarray:
    """Residual of ``E hot (Fbar.U) + F hot (Ebar.U) - (E.Fbar + Ebar.F) U``."""
    Ea, Fa, Ua = E.arr, F.arr, U.arr
    lhs = hot1(Ea, vec_dot_2(np.conj(Fa), Ua)) + hot1(Fa, vec_dot_2(np.conj(Ea), Ua))
    rhs = (dot1(Ea, np.conj(Fa)) + dot1(np.conj(Ea), Fa)) * Ua
    return _norm(lhs - rhs, 2)


# ------------------------------------------------- derivative data at a point
# Pointwise first-derivative data: ``d[a, ...]`` is the horizontal covariant
# derivative nabla_a of the value.  Contractions commute with nabla and the
# Leibniz rule determines the derivative of products, so the Leibniz formulas
# are algebraic identities in (value, derivative) pairs.
def cD(d: np.ndarray) -> np.ndarray:
    """``D_a = nabla_a + i eps_ab nabla_b`` applied to derivative data."""
    return d + 1j * np.einsum("ab,b...->a...", EPS, d)


def cDbar(d: np.ndarray) -> np.ndarray:
    return d - 1j * np.einsum("ab,b...->a...", EPS, d)


def _hot_deriv(Dd: np.ndarray) -> np.ndarray:
    """``1/2 (X_ab + X_ba - delta tr X)`` for ``X_ab = D_a F_b``."""
    return 0.5 * (Dd + np.swapaxes(Dd, 0, 1) - delta_times(tr(Dd)))


def leibniz_identities(
    h: np.ndarray, dh: np.ndarray, F: np.ndarray, dF: np.ndarray, U: np.ndarray, dU: np.ndarray
) -> dict[str, np.ndarray]:
    """Leibniz formulas for products of S0(C), S1(C), S2(C) values with derivative data.

    Shapes: ``h (...)``, ``dh (2, ...)``, ``F (2, ...)``, ``dF (2, 2, ...)``,
    ``U (2, 2, ...)``, ``dU (2, 2, 2, ...)``.
    """
    Fb, dFb = np.conj(F), np.conj(dF)
    # h F
    d_hF = np.einsum("a...,b...->ab...", dh, F) + h * dF
    lhs1 = tr(cDbar(d_hF))
    rhs1 = h * tr(cDbar(dF)) + dot1(cDbar(dh), F)
    lhs2 = _hot_deriv(cD(d_hF))
    rhs2 = h * _hot_deriv(cD(dF)) + hot1(cD(dh), F)
    # h U
    d_hU = np.einsum("a...,bc...->abc...", dh, U) + h * dU
    lhs3 = np.einsum("aab...->b...", cDbar(d_hU))
    rhs3 = vec_dot_2(cDbar(dh), U) + h * np.einsum("aab...->b...", cDbar(dU))
    # Fbar . U
    d_FU = np.einsum("ac...,cb...->ab...", dFb, U) + np.einsum("c...,acb...->ab...", Fb, dU)
    lhs4 = _hot_deriv(cD(d_FU))
    rhs4 = tr(cD(dFb)) * U + np.einsum("c...,cab...->ab...", Fb, cD(dU))
    return {
        "ov_DD_hF": np.abs(lhs1 - rhs1),
        "DD_hot_hF": _norm(lhs2 - rhs2, 2),
        "ov_DD_hU": _norm(lhs3 - rhs3, 1),
        "Leibniz_hot": _norm(lhs4 - rhs4, 2),
    }


def simplification_angular(F: np.ndarray, U: np.ndarray, dU: np.ndarray) -> dict[str, np.ndarray]:
    """Angular simplifications pairing ``F`` in S1(C) with derivative data of ``U`` in S2(C)."""
    f = F.real
    Fb = np.conj(F)
    DbU = cDbar(dU)
    DU = cD(dU)
    div_bar = np.einsum("aab...->b...", DbU)
    F_Dbar_U = np.einsum("c...,cab...->ab...", F, DbU)
    Fb_D_U = np.einsum("c...,cab...->ab...", Fb, DU)
    f_nabla_U = np.einsum("c...,cab...->ab...", f, dU)
    F_nabla_U = np.einsum("c...,cab...->ab...", F, dU)
    FFb_nabla_U = np.einsum("c...,cab...->ab...", F + Fb, dU)
    return {
        "hot_divbar": _norm(hot1(F, div_bar) - F_Dbar_U, 2),
        "sum_4f": _norm(F_Dbar_U + Fb_D_U - 4 * f_nabla_U, 2),
        "F_Dbar_2F": _norm(F_Dbar_U - 2 * F_nabla_U, 2),
        "relation0angular": _norm(2 * f_nabla_U - FFb_nabla_U, 2),
    }


def complex_derivative_identities(
    a: np.ndarray, da: np.ndarray, b: np.ndarray, db: np.ndarray,
    xi: np.ndarray, dxi: np.ndarray, u: np.ndarray, du: np.ndarray,
) -> dict[str, np.ndarray]:
    """Derivative part of the complexification lemma for real data ``a, b, xi, u``.

    ``dxi[a, b] = nabla_a xi_b`` and ``du[a, b, c] = nabla_a u_bc``.
    """
    del a, b
    dX = dxi + 1j * np.einsum("bc,ac...->ab...", EPS, dxi)
    del u
    dUc = du + 1j * np.einsum("bd,adc...->abc...", EPS, du)
    div = tr(dxi)
    curl = atr(dxi)
    nabla_hot_xi = _hot_deriv(dxi)
    div_u = np.einsum("aab...->b...", du)
    return {
        "D_scalar": _norm(da - dual1(db) + 1j * (dual1(da) + db) - cD(da + 1j * db), 1),
        "div_curl": np.abs(div + 1j * curl - 0.5 * tr(cDbar(dX))),
        "hot_derivative": _norm(
            nabla_hot_xi + 1j * ldual2(nabla_hot_xi) - 0.5 * _hot_deriv(cD(dX)), 2
        ),
        "div_sym": _norm(
            div_u + 1j * dual1(div_u) - 0.5 * np.einsum("aab...->b...", cDbar(dUc)), 1
        ),
        "D_dot_F_zero": np.abs(tr(cD(dX))),
        "D_dot_U_zero": _norm(np.einsum("aab...->b...", cD(dUc)), 1),
    }


# ---------------------------------------------------------------- sampling
def sample_real(rng: np.random.Generator, shape: tuple[int, ...], n: int) -> np.ndarray:
    """Uniform ``[-1, 1]`` components with a few adversarial samples prepended."""
    x = rng.uniform(-1.0, 1.0, size=shape + (n,))
    if n >= 4:
        x[..., 0] = 0.0
        x[..., 1] = 1.0
        flat = x[..., 2].reshape(-1)
        flat[:] = 0.0
        flat[0] = 1.0
        x[..., 2] = flat.reshape(shape)
    return x


def sample_complex(rng: np.random.Generator, shape: tuple[int, ...], n: int) -> np.ndarray:
    return sample_real(rng, shape, n) + 1j * sample_real(rng, shape, n)


def sample_vecc_derivative(rng: np.random.Generator, n: int) -> np.ndarray:
    """``dF[a, b]`` anti-self-dual in ``b``."""
    d1 = sample_complex(rng, (2,), n)
    return np.stack([d1, -1j * d1], axis=1)


def sample_sym2c_derivative(rng: np.random.Generator, n: int) -> np.ndarray:
    """``dU[a, b, c]`` anti-self-dual symmetric traceless in ``(b, c)``."""
    d11 = sample_complex(rng, (2,), n)
    return np.stack([sym2c_full(d11[0]), sym2c_full(d11[1])])


def sample_sym2r_derivative(rng: np.random.Generator, n: int) -> np.ndarray:
    d = sample_real(rng, (2, 2), n)
    return np.stack([HSym2R(d[k, 0], d[k, 1]).arr for k in range(2)])


def algebra_suite(rng: np.random.Generator, n: int = 1000) -> dict[str, np.ndarray]:
    """Every pointwise algebra identity evaluated on ``n`` random inputs."""
    def vec() -> HVecR:
        return HVecR.of(sample_real(rng, (2,), n))

    def gen() -> H2TensorR:
        return H2TensorR.of(sample_real(rng, (2, 2), n))

    def sym() -> HSym2R:
        x = sample_real(rng, (2,), n)
        return HSym2R(x[0], x[1])

    out: dict[str, np.ndarray] = {}
    for k, v in duals_identities(vec(), gen(), sym()).items():
        out[f"duals.{k}"] = v
    for k, v in le_duals_identities(vec(), vec(), gen()).items():
        out[f"le_duals.{k}"] = v
    U = gen()
    h, t, at, _ = decompose(U)
    out["decompose.reassemble"] = _norm(reassemble(h, t, at).arr - U.arr, 2)
    out["le_sym_product"] = sym_product_identity(sym(), sym())
    u = sym()
    out["le_sym_product.square"] = _norm(matmul2(u.arr, u.arr) - 0.5 * delta_times(dot2(u.arr, u.arr)), 2)
    for name, v in zip(("delta", "eps", "hat"), trace_identities(gen(), gen())):
        out[f"le_traces.{name}"] = v
    for name, v in zip(("delta", "eps", "hat"), special_products(gen())):
        out[f"special_products.{name}"] = v
    out["le_nonsym_product"] = nonsym_product_identity(gen(), sym())
    out["dot_hot"] = dot_hot_identity(vec(), vec(), sym())
    for k, v in useful_identities(vec(), vec(), sym(), sym()).items():
        out[f"usefulidentities.{k}"] = v
    for k, v in complexification_identities(vec(), vec(), sym(), sym()).items():
        out[f"complexification.{k}"] = v
    E = HVecC(sample_complex(rng, (), n))
    F = HVecC(sample_complex(rng, (), n))
    Uc = HSym2C(sample_complex(rng, (), n))
    out["simil_leibniz"] = simil_leibniz(E, F, Uc)
    hval = sample_complex(rng, (), n)
    dh = sample_complex(rng, (2,), n)
    dF = sample_vecc_derivative(rng, n)
    dU = sample_sym2c_derivative(rng, n)
    for k, v in leibniz_identities(hval, dh, F.arr, dF, Uc.arr, dU).items():
        out[f"leibniz.{k}"] = v
    for k, v in simplification_angular(F.arr, Uc.arr, dU).items():
        out[f"simplification_angular.{k}"] = v
    ra, rb = sample_real(rng, (), n), sample_real(rng, (), n)
    da, db = sample_real(rng, (2,), n), sample_real(rng, (2,), n)
    xi, dxi = sample_real(rng, (2,), n), sample_real(rng, (2, 2), n)
    us = sym()
    for k, v in complex_derivative_identities(
        ra, da, rb, db, xi, dxi, us.arr, sample_sym2r_derivative(rng, n)
    ).items():
        out[f"complex_derivatives.{k}"] = v
    return out
