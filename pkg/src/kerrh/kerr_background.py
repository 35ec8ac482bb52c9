"""Exact Kerr geometry in Boyer-Lindquist coordinates.

Everything is computed on a batch of sample points at once.  Coordinates are
ordered ``(t, r, theta, phi)``; frame vectors are ordered ``(e1, e2, e3, e4)``
and stored as rows of a ``(4, 4)`` component jet ``E[A, mu]``.

Background scalars depend on ``(r, theta)`` only, so their jets carry all
derivative information.  The metric is built at the working order (2), which
gives Christoffel symbols and frame connection coefficients at order 1 and the
Riemann tensor at order 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jets
from .errors import AxisOrHorizonProximity, GridInvalid
from .jets import Jet, contract

SIN_GUARD = 1e-6
DELTA_GUARD = 1e-8

# frame slot numbers used throughout the package
E1, E2, E3, E4 = 0, 1, 2, 3
# coordinate slot numbers
T, R, TH, PH = 0, 1, 2, 3

# g(e_A, e_B) for the ordering (e1, e2, e3, e4)
FRAME_METRIC = np.array(
    [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, -2.0], [0.0, 0.0, -2.0, 0.0]]
)
FRAME_METRIC_INV = np.linalg.inv(FRAME_METRIC)


@dataclass(frozen=True)
class KerrParams:
    """Mass ``m`` and specific angular momentum ``a`` of a subextremal Kerr hole."""

    m: float
    a: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not abs(self.a) < self.m:
            raise ValueError(f"|a| must be below m (subextremal), got a={self.a}, m={self.m}")

    @property
    def r_plus(self) -> float:
        return self.m + np.sqrt(self.m**2 - self.a**2)


@dataclass(frozen=True)
class BLPoint:
    """Boyer-Lindquist point; only ``r`` and ``theta`` enter background values."""

    r: float
    theta: float
    t: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class Frame:
    """Coordinate components of the principal null frame at one point."""

    e3: np.ndarray
    e4: np.ndarray
    e1: np.ndarray
    e2: np.ndarray


@dataclass(frozen=True)
class ConnTable:
    """Christoffel symbols ``gamma[mu, nu, lam]`` and ``rot[A, a, b] = g(D_A e_b, e_a)``."""

    gamma: np.ndarray
    rot: np.ndarray


def check_points(m, a, r, theta, horizon_guard: bool = True) -> None:
    """Raise :class:`AxisOrHorizonProximity` for points outside the usable chart.

    With ``horizon_guard=False`` points on the outer horizon itself are
    accepted; this is only meaningful for literal closed-form evaluation,
    which never divides by ``Delta``.
    """
    m, a, r, theta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (m, a, r, theta)))
    if m.size == 0:
        raise GridInvalid("no sample points")
    if np.any(np.abs(a) >= m):
        raise ValueError("superextremal or extremal parameters")
    rp = m + np.sqrt(m**2 - a**2)
    delta = r**2 - 2 * m * r + a**2
    q2 = r**2 + a**2 * np.cos(theta) ** 2
    bad_axis = np.abs(np.sin(theta)) < SIN_GUARD
    if horizon_guard:
        bad_horizon = (r <= rp) | (delta / q2 < DELTA_GUARD)
    else:
        bad_horizon = r < rp * (1 - 1e-14)
    if np.any(bad_axis | bad_horizon):
        k = int(np.argmax(bad_axis | bad_horizon))
        raise AxisOrHorizonProximity(
            f"point r={float(r.flat[k])!r}, theta={float(theta.flat[k])!r} (m={float(m.flat[k])!r}, a={float(a.flat[k])!r}) "
            "lies within the axis/horizon guard band"
        )


class Background:
    """Kerr geometry on a batch of points ``(m, a, r, theta)`` (1-d arrays).

    The arrays ``om`` and ``mp`` are optional per-point mode numbers; they are
    not used by the background itself but travel with it so that test fields
    can be evaluated on the same flattened point set.
    """

    def __init__(self, m, a, r, theta, order: int = 2, om=0.0, mp=0.0, horizon_guard: bool = True):
        m, a, r, theta = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=float)) for v in (m, a, r, theta))
        )
        check_points(m, a, r, theta, horizon_guard)
        self.m = m.copy()
        self.a = a.copy()
        self.r0 = r.copy()
        self.th0 = theta.copy()
        self.order = order
        self.om = np.broadcast_to(np.asarray(om, dtype=float), m.shape).copy()
        self.mp = np.broadcast_to(np.asarray(mp, dtype=float), m.shape).copy()

    @classmethod
    def at(cls, params: KerrParams, point: BLPoint, order: int = 2) -> Background:
        return cls(params.m, params.a, point.r, point.theta, order)

    @property
    def npts(self) -> int:
        return self.m.size

    # ------------------------------------------------------ background scalars
    @cached_property
    def r(self) -> Jet:
        return Jet.variable(self.r0, 0, self.order)

    @cached_property
    def theta(self) -> Jet:
        return Jet.variable(self.th0, 1, self.order)

    @cached_property
    def sin(self) -> Jet:
        return jets.sin(self.theta)

    @cached_property
    def cos(self) -> Jet:
        return jets.cos(self.theta)

    @cached_property
    def delta(self) -> Jet:
        r = self.r
        return r * r - 2.0 * self.m * r + self.a**2

    @cached_property
    def q2(self) -> Jet:
        """``|q|^2 = r^2 + a^2 cos^2 theta``."""
        return self.r * self.r + self.a**2 * self.cos * self.cos

    @cached_property
    def qabs(self) -> Jet:
        return jets.sqrt(self.q2)

    @cached_property
    def sigma2(self) -> Jet:
        """``Sigma^2 = (r^2 + a^2)^2 - a^2 sin^2 theta Delta``."""
        ra = self.r * self.r + self.a**2
        return ra * ra - self.a**2 * self.sin * self.sin * self.delta

    @cached_property
    def q(self) -> Jet:
        """``q = r + i a cos theta``."""
        return self.r + 1j * self.a * self.cos

    # ------------------------------------------------------------ the metric
    @cached_property
    def metric(self) -> Jet:
        """Covariant metric ``g[mu, nu]`` assembled from the Boyer-Lindquist line element."""
        q2, d, s2, sn = self.q2, self.delta, self.sigma2, self.sin
        sin2 = sn * sn
        shift = 2.0 * self.a * self.m * self.r / s2
        gpp = s2 * sin2 / q2
        zero = Jet.zeros(self.npts, self.order)
        g_tt = -q2 * d / s2 + gpp * shift * shift
        g_tp = -gpp * shift
        rows = [
            [g_tt, zero, zero, g_tp],
            [zero, q2 / d, zero, zero],
            [zero, zero, q2, zero],
            [g_tp, zero, zero, gpp],
        ]
        return jets.stack([jets.stack(row) for row in rows])

    @cached_property
    def metric_inv(self) -> Jet:
        """Inverse metric by block inversion of the ``(t, phi)`` sector."""
        g = self.metric
        g_tt, g_tp, g_pp = g[T, T], g[T, PH], g[PH, PH]
        det = g_tt * g_pp - g_tp * g_tp
        zero = Jet.zeros(self.npts, self.order)
        rows = [
            [g_pp / det, zero, zero, -g_tp / det],
            [zero, 1.0 / g[R, R], zero, zero],
            [zero, zero, 1.0 / g[TH, TH], zero],
            [-g_tp / det, zero, zero, g_tt / det],
        ]
        return jets.stack([jets.stack(row) for row in rows])

    @cached_property
    def metric_derivs(self) -> Jet:
        """``dg[lam, mu, nu] = partial_lam g_{mu nu}`` (zero for ``t`` and ``phi``)."""
        g = self.metric
        zero = Jet.zeros(self.npts, self.order - 1, comp=(4, 4))
        return jets.stack([zero, g.dr(), g.dth(), zero])

    @cached_property
    def christoffel(self) -> Jet:
        """``Gamma[mu, nu, lam]`` = Gamma^mu_{nu lam} of the Levi-Civita connection."""
        dg = self.metric_derivs
        # Gamma_{sigma nu lam} = 1/2 (d_nu g_{sigma lam} + d_lam g_{sigma nu} - d_sigma g_{nu lam})
        first = Jet(
            0.5 * (np.einsum("Knsl...->Ksnl...", dg.c) + np.einsum("Klsn...->Ksnl...", dg.c)
                   - dg.c),
            dg.order,
        )
        return contract("ms,snl->mnl", self.metric_inv, first)

    @cached_property
    def riemann_coord(self) -> np.ndarray:
        """``R[rho, sigma, mu, nu]`` = R_{rho sigma mu nu} at the base points (all lowered)."""
        gam = self.christoffel
        gv = gam.value
        dgam = np.zeros((4,) + gv.shape, dtype=complex)
        dgam[R] = gam.dr().value
        dgam[TH] = gam.dth().value
        # R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
        #                      + G^rho_{mu lam} G^lam_{nu sigma} - G^rho_{nu lam} G^lam_{mu sigma}
        up = (
            np.einsum("mrnsz->rsmnz", dgam)
            - np.einsum("nrmsz->rsmnz", dgam)
            + np.einsum("rmlz,lnsz->rsmnz", gv, gv)
            - np.einsum("rnlz,lmsz->rsmnz", gv, gv)
        )
        return np.einsum("prz,rsmnz->psmnz", self.metric.value, up)

    # -------------------------------------------------------------- frames
    @cached_property
    def frame_components(self) -> Jet:
        """Principal null frame ``E[A, mu]`` with rows ``(e1, e2, e3, e4)``."""
        a, q2, d, qa, sn = self.a, self.q2, self.delta, self.qabs, self.sin
        ra = self.r * self.r + a**2
        zero = Jet.zeros(self.npts, self.order)
        e1 = [zero, zero, 1.0 / qa, zero]
        e2 = [a * sn / qa, zero, zero, 1.0 / (qa * sn)]
        e3 = [ra / q2, -d / q2, zero, a / q2]
        e4 = [ra / d, zero + 1.0, zero, a / d]
        return jets.stack([jets.stack(row) for row in (e1, e2, e3, e4)])

    @cached_property
    def geometry(self) -> FrameGeometry:
        """The principal null frame with its connection data."""
        return FrameGeometry(self, self.frame_components)

    def frame(self, k: int = 0) -> Frame:
        """Pointwise :class:`Frame` values at point index ``k``."""
        e = self.frame_components.value[..., k].real
        return Frame(e3=e[E3], e4=e[E4], e1=e[E1], e2=e[E2])


class FrameGeometry:
    """A null frame ``(e1, e2, e3, e4)`` on a :class:`Background` and its connection.

    ``conn[A, B, C] = g(D_{e_A} e_B, e_C)`` is built from Christoffel symbols and
    frame derivatives, so any normalised null frame (for instance a rescaled
    one) can be used.
    """

    def __init__(self, bg: Background, E: Jet):
        self.bg = bg
        self.E = E

    @property
    def npts(self) -> int:
        return self.bg.npts

    def rescaled(self, lam: Jet) -> FrameGeometry:
        """Frame with ``e3 -> e3 / lam`` and ``e4 -> lam e4``; ``lam`` must be mode-free."""
        E = self.E
        rows = [E[E1], E[E2], E[E3] / lam, E[E4] * lam]
        return FrameGeometry(self.bg, jets.stack(rows))

    # ------------------------------------------------------------ derivatives
    def deriv(self, A: int, f: Jet) -> Jet:
        """Frame derivative ``e_A(f)`` of a (tensor) jet carrying an optional mode."""
        E = self.E
        out = E[A, R] * f.dr() + E[A, TH] * f.dth()
        if np.any(f.om):
            out = out + E[A, T] * (f * (-1j * np.asarray(f.om)))
        if np.any(f.mp):
            out = out + E[A, PH] * (f * (1j * np.asarray(f.mp)))
        return out

    def coord_deriv(self, mu: int, f: Jet) -> Jet:
        """Coordinate derivative with ``partial_t -> -i om`` and ``partial_phi -> i mp``."""
        if mu == R:
            return f.dr()
        if mu == TH:
            return f.dth()
        if mu == T:
            return f * (-1j * np.asarray(f.om))
        return f * (1j * np.asarray(f.mp))

    def hderiv(self, A: int, U: Jet) -> Jet:
        """Horizontal covariant derivative ``(nabla_A U)`` of a horizontal tensor.

        Every component axis of ``U`` is a horizontal slot of size two:
        ``(nabla_A U)_{b..} = e_A(U_{b..}) - sum_slots g(D_A e_b, e_c) U_{..c..}``.
        """
        out = self.deriv(A, U)
        rot = self.conn[A, :2, :2]
        letters = "bcdefg"[: len(U.comp)]
        for k in range(len(U.comp)):
            src = letters[:k] + "z" + letters[k + 1 :]
            out = out - contract(f"{letters[k]}z,{src}->{letters}", rot, U)
        return out

    # ------------------------------------------------------------ connection
    @cached_property
    def conn(self) -> Jet:
        """``conn[A, B, C] = g(D_{e_A} e_B, e_C)``."""
        bg, E = self.bg, self.E
        dE_r, dE_th = E.dr(), E.dth()
        # e_A(E_B^nu)
        de = contract("A,Bn->ABn", E[:, R], dE_r) + contract("A,Bn->ABn", E[:, TH], dE_th)
        # Gamma^nu_{mu lam} E_A^mu E_B^lam
        ge = contract("nml,Bl->nmB", bg.christoffel, E)
        ge = contract("Am,nmB->ABn", E, ge)
        vec = de + ge
        low = contract("ns,Cs->nC", bg.metric, E)
        return contract("ABn,nC->ABC", vec, low)

    @cached_property
    def conn_table(self) -> ConnTable:
        gam = self.bg.christoffel.value
        rot = np.einsum("ABCz->ACBz", self.conn.value[:, :2, :2])
        return ConnTable(gamma=gam, rot=rot)

    @cached_property
    def riemann(self) -> np.ndarray:
        """Frame components ``R[A, B, C, D]`` at the base points."""
        Ev = self.E.value
        Rc = self.bg.riemann_coord
        return np.einsum("psmnz,Apz,Bsz,Cmz,Dnz->ABCDz", Rc, Ev, Ev, Ev, Ev, optimize=True)

    @cached_property
    def frame_gram(self) -> np.ndarray:
        """``g(e_A, e_B)`` at the base points, for normalisation checks."""
        Ev = self.E.value
        return np.einsum("Amz,mnz,Bnz->ABz", Ev, self.bg.metric.value, Ev)


def metric(params: KerrParams, point: BLPoint) -> Jet:
    """Metric jet at one point (component shape ``(4, 4)``)."""
    return Background.at(params, point).metric


def frame(params: KerrParams, point: BLPoint) -> Frame:
    return Background.at(params, point).frame()


def christoffels(params: KerrParams, point: BLPoint) -> ConnTable:
    return Background.at(params, point).geometry.conn_table


def riemann(params: KerrParams, point: BLPoint) -> dict[str, complex]:
    """Null Weyl components at one point: alpha, beta, rho, rho_dual, betab, alphab."""
    R4 = Background.at(params, point).geometry.riemann[..., 0]
    return weyl_components(R4)


def weyl_components(R4: np.ndarray) -> dict[str, np.ndarray]:
    """Null decomposition of frame components ``R[A, B, C, D]`` (orientation e1, e2, e3, e4)."""
    a, b = slice(0, 2), slice(0, 2)
    alpha = R4[a, E4, b, E4]
    alphab = R4[a, E3, b, E3]
    beta = 0.5 * R4[a, E4, E3, E4]
    betab = 0.5 * R4[a, E3, E3, E4]
    rho = 0.25 * R4[E3, E4, E3, E4]
    rho_dual = 0.5 * R4[E1, E2, E3, E4]
    return {
        "alpha": alpha,
        "beta": beta,
        "rho": rho,
        "rho_dual": rho_dual,
        "betab": betab,
        "alphab": alphab,
    }
