"""Identity registry, grid sampling, residual aggregation and reports.

Every identity checked by the package is registered here as an
:class:`IdentitySpec`.  An identity evaluates to one or more
:class:`Measurement` objects (per-point absolute and relative residuals at
known sample coordinates); :func:`run_suite` reduces them to a
:class:`Report` in registry order, independent of execution order.

Some registered entries are *canaries*: formulas in an uncorrected form that
are known to be wrong.  They carry ``expect_pass=False``; the report keeps the
literal verdict ``pass = max_residual <= tolerance`` and flags an entry only
when the verdict differs from the expectation.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import os
import platform
import zlib
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import ClassVar

import numpy as np

from . import __version__
from . import connection_curvature as cc
from . import hcalculus as hc
from . import htensor_algebra as ha
from . import wave_operators as wo
from .errors import GridInvalid, UnknownSuite
from .hcalculus import CommResult, FieldSpec, Mode
from .kerr_background import FRAME_METRIC, SIN_GUARD, Background

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 20240611
RANDOM_SAMPLES = 1000
HORIZON_MARGIN = 0.05


# -------------------------------------------------------------------- grids
@dataclass(frozen=True)
class GridSpec:
    """Tensor-product sample grid over ``(r, theta)`` for every ``(m, a)`` pair.

    Radii are log-spaced in units of ``m``; angles are linearly spaced.
    """

    r_min: float
    r_max: float
    n_r: int
    theta_min: float
    theta_max: float
    n_theta: int
    params: tuple[tuple[float, float], ...]
    modes: tuple[tuple[float, int], ...] = ((0.0, 0),)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple((float(m), float(a)) for m, a in self.params))
        object.__setattr__(self, "modes", tuple((float(w), int(k)) for w, k in self.modes))
        if self.n_r < 1 or self.n_theta < 1:
            raise GridInvalid("grid has no points")
        if not self.params:
            raise GridInvalid("grid has no (m, a) pairs")
        if not self.modes:
            raise GridInvalid("grid has no modes")
        if not (self.r_max >= self.r_min > 0):
            raise GridInvalid(f"bad radial range [{self.r_min}, {self.r_max}]")
        if not (SIN_GUARD < self.theta_min <= self.theta_max < np.pi - SIN_GUARD):
            raise GridInvalid(f"angular range [{self.theta_min}, {self.theta_max}] touches the axis")
        if (self.n_r > 1 and self.r_max == self.r_min) or (self.n_theta > 1 and self.theta_max == self.theta_min):
            raise GridInvalid("repeated sample points")
        for m, a in self.params:
            if m <= 0 or abs(a) >= m:
                raise GridInvalid(f"(m, a) = ({m}, {a}) is not sub-extremal")
            r_plus = m + np.sqrt(m * m - a * a)
            if self.r_min * m <= r_plus + HORIZON_MARGIN * m:
                raise GridInvalid(f"r_min = {self.r_min} m is inside the horizon guard for a = {a}")

    def radii(self) -> np.ndarray:
        if self.n_r == 1:
            return np.array([self.r_min])
        return np.geomspace(self.r_min, self.r_max, self.n_r)

    def thetas(self) -> np.ndarray:
        if self.n_theta == 1:
            return np.array([self.theta_min])
        return np.linspace(self.theta_min, self.theta_max, self.n_theta)

    def points(self, m: float) -> tuple[np.ndarray, np.ndarray]:
        """Flattened ``(r, theta)`` arrays, radius-major."""
        R, TH = np.meshgrid(self.radii() * m, self.thetas(), indexing="ij")
        return R.ravel(), TH.ravel()

    @property
    def npts(self) -> int:
        return self.n_r * self.n_theta

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = [list(p) for p in self.params]
        d["modes"] = [list(p) for p in self.modes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> GridSpec:
        try:
            return cls(
                r_min=float(d["r_min"]),
                r_max=float(d["r_max"]),
                n_r=int(d["n_r"]),
                theta_min=float(d["theta_min"]),
                theta_max=float(d["theta_max"]),
                n_theta=int(d["n_theta"]),
                params=tuple(tuple(p) for p in d["params"]),
                modes=tuple(tuple(p) for p in d.get("modes", [(0.0, 0)])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise GridInvalid(f"malformed grid description: {exc}") from exc

    def with_params(self, params: Iterable[tuple[float, float]]) -> GridSpec:
        d = self.to_dict()
        d["params"] = [list(p) for p in params]
        return GridSpec.from_dict(d)


def default_grid() -> GridSpec:
    return GridSpec(
        r_min=2.2,
        r_max=50.0,
        n_r=24,
        theta_min=0.15,
        theta_max=np.pi - 0.15,
        n_theta=12,
        params=((1.0, 0.0), (1.0, 0.3), (1.0, 0.7), (1.0, 0.95)),
        modes=((0.0, 0), (0.3, 2), (0.7, -1)),
    )


def load_grid(path: str) -> GridSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise GridInvalid(f"cannot read grid file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GridInvalid(f"grid file is not JSON: {exc}") from exc
    return GridSpec.from_dict(data)


# -------------------------------------------------------------- measurements
@dataclass
class Measurement:
    """Per-point residuals of one labelled member of an identity.

    ``points`` has one row ``(m, a, r, theta)`` per sample; for random-tensor
    identities the row is ``(nan, nan, k, nan)`` with ``k`` the sample index.
    """

    label: str
    absolute: np.ndarray
    relative: np.ndarray
    points: np.ndarray


class EvalContext:
    """Shared state for one ``(m, a)`` pair: background, cached test fields, seed."""

    def __init__(self, grid: GridSpec, m: float, a: float, seed: int, f_const: float):
        self.grid = grid
        self.m, self.a = m, a
        self.seed = seed
        self.f_const = f_const
        self.r, self.theta = grid.points(m)
        self._fields: dict = {}

    @cached_property
    def bg(self) -> Background:
        return Background(self.m, self.a, self.r, self.theta)

    @cached_property
    def point_rows(self) -> np.ndarray:
        n = self.r.size
        return np.stack([np.full(n, self.m), np.full(n, self.a), self.r, self.theta], axis=1)

    def rng(self, tag: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(tag.encode())])

    def fields(self, kind: str, asd: bool = True, s: int = 0) -> list[FieldSpec]:
        """One test field per grid mode, with seed-determined complex amplitudes."""
        key = (kind, asd, s)
        if key not in self._fields:
            rng = self.rng(f"fields/{kind}/{asd}/{s}")
            profiles = (("inv1", "sin"), ("inv2", "P2"), ("exp10", "cos"))
            out = []
            for k, (om, mp) in enumerate(self.grid.modes):
                rad, ang = profiles[k % len(profiles)]
                amp = complex(1.0 + 0.5 * rng.random(), rng.random() - 0.5)
                out.append(
                    FieldSpec(
                        name=f"{kind.lower()}_{k}",
                        kind=kind,
                        radial=rad,
                        angular=ang,
                        mode=Mode(om, mp),
                        s=s,
                        anti_self_dual=asd,
                        amplitude=amp,
                    )
                )
            self._fields[key] = out
        return self._fields[key]

    def jet(self, spec: FieldSpec):
        return hc.field_jet(spec, self.bg)

    # ----------------------------------------------------------- converters
    def from_comm(self, label: str, res: CommResult) -> Measurement:
        return Measurement(label, np.asarray(res.residual, float), np.asarray(res.relative, float), self.point_rows)

    def from_abs(self, label: str, absolute: np.ndarray, scale: np.ndarray | float = 1.0) -> Measurement:
        absolute = np.broadcast_to(np.asarray(absolute, float), (self.r.size,))
        rel = absolute / np.maximum(np.broadcast_to(np.abs(scale), absolute.shape), 1e-300)
        return Measurement(label, absolute, rel, self.point_rows)


# ------------------------------------------------------------------ registry
Evaluator = Callable[[EvalContext], list[Measurement]]


@dataclass(frozen=True)
class IdentitySpec:
    """One registered identity.

    ``scope`` is ``grid`` (evaluated for every ``(m, a)`` pair), ``schwarzschild``
    (only for ``a = 0`` pairs), ``rotating`` (only ``a != 0``), ``random``
    (seeded random tensors, once per run) or ``global`` (needs the whole grid).
    ``measure`` selects the residual compared with ``tolerance``.
    """

    id: str
    op: str
    anchor: str
    inputs: tuple[str, ...]
    tolerance: float
    evaluate: Callable
    suites: tuple[str, ...]
    measure: str = "relative"
    scope: str = "grid"
    expect_pass: bool = True
    criterion: int | None = None
    grid: GridSpec | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"{self.id}: tolerance must be positive")
        if self.measure not in ("relative", "absolute"):
            raise ValueError(f"{self.id}: unknown measure {self.measure!r}")


REGISTRY: dict[str, IdentitySpec] = {}


def register(spec: IdentitySpec) -> IdentitySpec:
    if spec.id in REGISTRY:
        raise ValueError(f"duplicate identity id {spec.id!r}")
    REGISTRY[spec.id] = spec
    return spec


def _reg(id_, op, anchor, inputs, tol, suites, **kw):
    def deco(fn):
        register(IdentitySpec(id_, op, anchor, tuple(inputs), tol, fn, tuple(suites), **kw))
        return fn

    return deco


def _dict_members(ctx: EvalContext, prefix: str, d: dict, scale=1.0) -> list[Measurement]:
    return [ctx.from_abs(f"{prefix}{k}", v, scale) for k, v in d.items()]


# ---------------------------------------------------------------- kerr values
KV = ("kerr-values", "all")


@_reg("frame.normalisation", "kerr_background.frame", "g(e_A, e_B) = diag(1, 1) + (-2) in the (3, 4) block",
      ["background"], 1e-9, KV, criterion=1)
def _frame_norm(ctx):
    gram = ctx.bg.geometry.frame_gram
    diff = np.abs(gram - FRAME_METRIC[..., None]).reshape(16, -1).max(axis=0)
    return [ctx.from_abs("gram", diff, 2.0)]


@_reg("ricci.two_route", "connection_curvature.ricci_two_route", "frame route = closed forms for trX, trXb, H, Hb, Z, omegab, ...",
      ["background"], 1e-9, KV, criterion=1)
def _ricci_two(ctx):
    return [Measurement(k, a_, r_, ctx.point_rows) for k, (a_, r_) in cc.ricci_two_route(ctx.bg).items()]


@_reg("curvature.two_route", "connection_curvature.curv_two_route", "Riemann projection = closed forms for A, B, P, Bbar, Abar",
      ["background"], 1e-9, KV, criterion=1)
def _curv_two(ctx):
    return [Measurement(k, a_, r_, ctx.point_rows) for k, (a_, r_) in cc.curv_two_route(ctx.bg).items()]


@_reg("curvature.P_oracle", "connection_curvature.curv_values_from_riemann", "P = rho + i *rho = -2m/q^3",
      ["background"], 1e-9, KV, criterion=3)
def _p_oracle(ctx):
    P = cc.curv_values_from_riemann(ctx.bg.geometry).P
    P0 = cc.P_closed_form(ctx.bg).value
    return [ctx.from_comm("P", CommResult(P, P0, 0))]


@_reg("kerr.vanishing", "connection_curvature.kerr_vanishing", "Xhat = Xbhat = Xi = Xib = omega = A = B = 0, Hb = -Z",
      ["background"], 1e-9, KV, measure="absolute", criterion=1)
def _vanishing(ctx):
    return _dict_members(ctx, "", cc.kerr_vanishing(ctx.bg))


@_reg("q.equations", "connection_curvature.q_equations", "nabla_4 q = 1/2 trX q, nabla_3 q = 1/2 conj(trXb) q, D q = q Hb, q Hb = -qbar H",
      ["background"], 1e-10, KV, measure="absolute", criterion=4)
def _q_eq(ctx):
    return _dict_members(ctx, "frame.", cc.q_equations(ctx.bg, "frame")) + _dict_members(
        ctx, "closed.", cc.q_equations(ctx.bg, "closed"))


@_reg("trchb.gradient", "connection_curvature.trchb_gradient", "nabla trchb = -3/2 trchb (eta + etab) - 1/2 atrchb (*eta - *etab)",
      ["background"], 1e-10, KV, measure="absolute")
def _trchb(ctx):
    return _dict_members(ctx, "", cc.trchb_gradient(ctx.bg))


@_reg("null_structure", "connection_curvature.null_structure", "null structure equations with shear, Xi and omega terms dropped",
      ["background"], 1e-9, KV, measure="absolute", criterion=1)
def _null(ctx):
    return _dict_members(ctx, "", cc.null_structure(ctx.bg))


@_reg("bianchi.P", "connection_curvature.bianchi_P", "nabla_4 P = -3/2 trX P, D P = -3 P Hb",
      ["background"], 1e-9, KV, measure="absolute", criterion=1)
def _bianchi(ctx):
    return _dict_members(ctx, "", cc.bianchi_P(ctx.bg))


@_reg("conformal.rescale", "connection_curvature.conformal_rescale", "trX -> lam trX, omega -> lam (omega - 1/2 e4 log lam), ...",
      ["background"], 1e-9, KV, measure="absolute")
def _rescale(ctx):
    return _dict_members(ctx, "", cc.conformal_rescale(ctx.bg))


# -------------------------------------------------------------- random tensors
RT = ("random-tensor", "all")


def _algebra_groups() -> dict[str, str]:
    return {
        "duals": "**w = -w, *(*U) = -U, tr/atr/hat of duals",
        "le_duals": "(*x).y = -x.(*y) and right duals",
        "decompose": "U = hat U + 1/2 tr U delta + 1/2 atr U eps",
        "le_sym_product": "u v + v u = (u.v) delta for symmetric traceless u, v",
        "le_traces": "traces of products of general 2-tensors",
        "special_products": "products with delta, eps, hat parts",
        "le_nonsym_product": "non-symmetric product identity",
        "dot_hot": "x hot (y.u) + y hot (x.u) = (x.y) u",
        "usefulidentities": "dual/dot/wedge/hot exchange identities",
        "complexification": "complexified dot, hot and anti-self-duality",
        "simil_leibniz": "E hot (Fbar.U) + F hot (Ebar.U) = (E.Fbar + Ebar.F) U",
        "leibniz": "Leibniz rules for D, Dbar, D hot on products",
        "simplification_angular": "(F.Dbar) U + (Fbar.D) U = 4 f.nabla U",
        "complex_derivatives": "D on scalars, 1-forms and symmetric 2-tensors",
    }


class _AlgebraCache:
    """One seeded draw of the whole random-tensor suite per (seed, samples)."""

    _store: ClassVar[dict] = {}

    @classmethod
    def get(cls, seed: int, n: int) -> dict[str, np.ndarray]:
        key = (seed, n)
        if key not in cls._store:
            cls._store[key] = ha.algebra_suite(np.random.default_rng([seed, 2]), n)
        return cls._store[key]


def _make_algebra(group: str, anchor: str):
    def ev(ctx):
        data = _AlgebraCache.get(ctx.seed, RANDOM_SAMPLES)
        out = []
        for k, v in data.items():
            if k == group or k.startswith(group + "."):
                v = np.asarray(v, float)
                rows = np.stack([np.full(v.size, np.nan), np.full(v.size, np.nan),
                                 np.arange(v.size, dtype=float), np.full(v.size, np.nan)], axis=1)
                out.append(Measurement(k, v, v, rows))
        return out

    register(IdentitySpec(f"algebra.{group}", f"htensor_algebra.{_ALGEBRA_OPS.get(group, group)}", anchor, ("random tensors",),
                          1e-13, ev, RT, measure="absolute", scope="random", criterion=2))


_ALGEBRA_OPS = {
    "duals": "duals_identities",
    "le_duals": "le_duals_identities",
    "le_sym_product": "sym_product_identity",
    "le_traces": "trace_identities",
    "le_nonsym_product": "nonsym_product_identity",
    "dot_hot": "dot_hot_identity",
    "usefulidentities": "useful_identities",
    "complexification": "complexification_identities",
    "leibniz": "leibniz_identities",
    "complex_derivatives": "complex_derivative_identities",
}

for _g, _anchor in _algebra_groups().items():
    _make_algebra(_g, _anchor)


# ---------------------------------------------------------------- calculus
CM = ("commutators", "all")

_COMM_ANCHORS = {
    "S0": "[nabla_3, nabla_a], [nabla_4, nabla_a], [nabla_4, nabla_3] on scalars",
    "S1": "commutators on 1-forms, including div and hot",
    "S2": "commutators on symmetric traceless 2-tensors",
    "C1": "complex commutators with D hot on anti-self-dual 1-forms",
    "C2": "complex commutators with Dbar on anti-self-dual 2-tensors",
    "cC1": "conformal commutators on anti-self-dual 1-forms",
    "cC2": "conformal commutators on anti-self-dual 2-tensors",
    "gauss": "Gauss equation on horizontal 1-forms",
}


def _make_comm(kind: str, variant: str, expect: bool):
    head = kind.split("_")[0]
    fkind, asd = hc.KIND_FIELD[head]
    sigs = (0, 1, 2, -2) if head.startswith("c") else (0,)

    def ev(ctx):
        out = []
        for s in sigs:
            for spec in ctx.fields(fkind, asd, s):
                res = hc.commutator(kind, ctx.bg.geometry, ctx.jet(spec), s, variant)
                out.append(ctx.from_comm(f"{spec.name}@{s}", res))
        return out

    suffix = ".uncorrected" if variant else ""
    register(IdentitySpec(f"comm.{kind}{suffix}", "hcalculus.commutator", _COMM_ANCHORS[head] + (" (uncorrected form)" if variant else ""),
                          (fkind,), 1e-8, ev, CM, expect_pass=expect, criterion=None if variant else 5))


for _k in hc.COMMUTATOR_KINDS:
    _make_comm(_k, "", True)
for _k in hc.CANARY_KINDS:
    _make_comm(_k, "uncorrected", False)


@_reg("calc.hodge", "hcalculus.hodge_consistency", "d1, d2 and their adjoints against the complex derivatives",
      ["S1"], 1e-8, CM, measure="absolute")
def _hodge(ctx):
    out = []
    for spec in ctx.fields("S1", False):
        out += _dict_members(ctx, f"{spec.name}.", hc.hodge_consistency(ctx.bg.geometry, ctx.jet(spec)))
    return out


@_reg("calc.conformal_derivatives", "hcalculus.conformal_invariance", "(c)nabla of lam^s f = lam^(s +- 1) (c)nabla f",
      ["S2"], 1e-8, CM, measure="absolute")
def _confinv(ctx):
    lam = cc.conformal_lambda(ctx.bg)
    out = []
    for s in (0, 1, 2, -2):
        for spec in ctx.fields("S2", True, s):
            out += _dict_members(ctx, f"{spec.name}@{s}.", hc.conformal_invariance(ctx.bg, spec, lam))
    return out


@_reg("calc.projection_rotation", "hcalculus.projection_rotation", "11-components of nabla_3, nabla_4, nabla_a and the Laplacian",
      ["S2"], 1e-8, CM, measure="absolute")
def _projrot(ctx):
    out = []
    for spec in ctx.fields("S2", True):
        out += _dict_members(ctx, f"{spec.name}.", hc.projection_rotation(ctx.bg, spec))
    return out


@_reg("calc.structural_zeros", "hcalculus.structural_zeros", "D.F = 0, D.U = 0 and preserved anti-self-duality",
      ["S1", "S2"], 1e-8, CM, measure="absolute")
def _zeros(ctx):
    F = ctx.fields("S1", True)
    U = ctx.fields("S2", True)
    out = []
    for f, u in zip(F, U):
        out += _dict_members(ctx, f"{f.name}.", hc.structural_zeros(ctx.bg, f, u))
    return out


@_reg("calc.leibniz_fields", "hcalculus.leibniz_fields", "Leibniz rules on products of test fields",
      ["S0", "S1", "S2"], 1e-8, CM, measure="absolute")
def _leib(ctx):
    h = ctx.fields("S0", False)
    F = ctx.fields("S1", True)
    U = ctx.fields("S2", True)
    out = []
    for k, (x, y, z) in enumerate(zip(h, F, U)):
        out += _dict_members(ctx, f"{k}.", hc.leibniz_fields(ctx.bg, x, y, z))
    return out


@_reg("calc.angular_simplification", "hcalculus.angular_simplification_fields", "(F.Dbar) U + (Fbar.D) U = 4 f.nabla U",
      ["S1", "S2"], 1e-8, CM, measure="absolute")
def _angsimp(ctx):
    out = []
    for f, u in zip(ctx.fields("S1", True), ctx.fields("S2", True)):
        out += _dict_members(ctx, f"{f.name}.", hc.angular_simplification_fields(ctx.bg, f, u))
    return out


# ------------------------------------------------------------ wave operators
WV = ("wave", "all")


def _make_box2(route: str, variant: str, expect: bool, anchor: str):
    def ev(ctx):
        geo = ctx.bg.geometry
        out = []
        for spec in ctx.fields("S2", True):
            out.append(ctx.from_comm(spec.name, wo.box2_equivalence(geo, ctx.jet(spec), route, variant)))
        if route in ("item1", "item3", "item1_derived", "item3_uncorrected"):
            for spec in ctx.fields("S2", False):
                out.append(ctx.from_comm(spec.name + ".real", wo.box2_equivalence(geo, ctx.jet(spec), route)))
        return out

    name = f"box2.{route}" + (f".{variant}" if variant else "")
    register(IdentitySpec(name, "wave_operators.box2", anchor, ("S2",), 1e-8, ev, WV,
                          expect_pass=expect, criterion=6 if expect else None))


_make_box2("item1", "", True, "box2 = -1/2 (nabla_3 nabla_4 + nabla_4 nabla_3) + Lap + (omegab - trchb/2) nabla_4 + (omega - trch/2) nabla_3 + (eta + etab).nabla")
_make_box2("item3", "", True, "box2 = -nabla_4 nabla_3 + Lap + (2 omega - trch/2) nabla_3 - trchb/2 nabla_4 + 2 etab.nabla - 2 (*rho - eta^etab) *Psi")
_make_box2("complex", "", True, "box2 = -nabla_4 nabla_3 + 1/2 D hot (Dbar.Psi) + ... - 2 conj(P) - 2i eta^etab")
_make_box2("conformal", "", True, "conformal type-0 form of the complex wave operator")
_make_box2("item3_uncorrected", "", False, "box2 item with -2 *rho *Psi only (uncorrected form)")
_make_box2("item1_derived", "", False, "symmetrised form with omegab in front of nabla_3 (uncorrected intermediate form)")
_make_box2("complex", "uncorrected", False, "complex form with -2P (uncorrected statement)")
_make_box2("complex", "as_derived", False, "complex form with -2 conj(P) and no eta^etab term (uncorrected intermediate form)")


def _make_field_check(id_, op, anchor, fn, kind="S2", asd=True, s=0, tol=1e-8, expect=True, criterion=6, scope="grid",
                      measure="relative"):
    def ev(ctx):
        return [ctx.from_comm(spec.name, fn(ctx, ctx.jet(spec))) for spec in ctx.fields(kind, asd, s)]

    register(IdentitySpec(id_, op, anchor, (kind,), tol, ev, WV, measure=measure, scope=scope,
                          expect_pass=expect, criterion=criterion))


_make_field_check("box2.commutator_34.uncorrected", "wave_operators.commutator_34_uncorrected",
                  "[nabla_3, nabla_4] Psi with *rho, omega and eta terms only (uncorrected form)",
                  lambda ctx, P: wo.commutator_34_uncorrected(ctx.bg.geometry, P), expect=False, criterion=None)
_make_field_check("dd_hot_ddbar", "wave_operators.dd_hot_ddbar_identity",
                  "D hot (Dbar.Psi) = 2 Lap Psi - i (atrch nabla_3 + atrchb nabla_4) Psi + ...",
                  lambda ctx, P: wo.dd_hot_ddbar_identity(ctx.bg.geometry, P))
_make_field_check("gauss_s2", "wave_operators.gauss_s2_identity",
                  "(nabla_1 nabla_2 - nabla_2 nabla_1) Psi = 1/2 (atrch nabla_3 + atrchb nabla_4) Psi + i (...) Psi",
                  lambda ctx, P: wo.gauss_s2_identity(ctx.bg.geometry, P))
_make_field_check("curvature_commutator", "wave_operators.curvature_commutator",
                  "(D_M D_N - D_N D_M) Psi = curvature of the projected connection acting on Psi",
                  lambda ctx, P: wo.curvature_commutator(ctx.bg.geometry, P), asd=False, criterion=None)
_make_field_check("teukolsky.split_angular_form", "wave_operators.teukolsky_L",
                  "(4H + Hb + conj Hb).(c)nabla A = 1/2 conj(Hb).(c)D A + (2H + Hb/2).(c)Dbar A",
                  lambda ctx, A: wo.teukolsky_forms(ctx.bg.geometry, A)["split"], s=2, criterion=None)
_make_field_check("teukolsky.intermediate_form", "wave_operators.teukolsky_intermediate",
                  "Teukolsky operator with ordinary derivatives and omegab terms",
                  lambda ctx, A: wo.teukolsky_forms(ctx.bg.geometry, A)["intermediate"], s=2, criterion=7)
_make_field_check("teukolsky.conformal", "wave_operators.teukolsky_L",
                  "L'(lam^2 A) = lam^2 L(A)",
                  lambda ctx, A: wo.teukolsky_conformal(ctx.bg.geometry, A, cc.conformal_lambda(ctx.bg)), s=2, criterion=None)
_make_field_check("teukolsky.projection", "wave_operators.teukolsky_projection",
                  "L(A)_11 = box a - wave-a right side with potential W",
                  lambda ctx, A: wo.teukolsky_projection(ctx.bg, A), s=2, criterion=7)
_make_field_check("chandra.qf_rescale", "wave_operators.qf",
                  "qf' (lam^2 A) = qf(A): conformal type 0",
                  lambda ctx, A: wo.qf_rescale(ctx.bg, A, cc.conformal_lambda(ctx.bg), ctx.f_const), s=2, criterion=8)


@_reg("emt.divergence", "wave_operators.emt_divergence_residual",
      "D^N Q_MN = 1/2 D_M Psi.(box Psibar - V Psibar) + c.c. + curvature coupling - 1/2 D_M V |Psi|^2",
      ["S2", "S0"], 1e-7, WV)
def _emt(ctx):
    out = []
    pots = ctx.fields("S0", False)
    for spec, vspec in zip(ctx.fields("S2", False), pots):
        V = hc.field_jet(FieldSpec("V", "S0", vspec.radial, vspec.angular, amplitude=1.0), ctx.bg)
        out.append(ctx.from_comm(spec.name, wo.emt_divergence_residual(ctx.bg.geometry, ctx.jet(spec), V)))
    return out


@_reg("emt.divergence.spacetime_curvature", "wave_operators.emt_divergence_residual",
      "divergence with the spacetime Riemann tensor in the coupling term", ["S2", "S0"], 1e-7, WV, expect_pass=False)
def _emt_st(ctx):
    out = []
    for spec in ctx.fields("S2", False):
        V = hc.field_jet(FieldSpec("V", "S0", "inv2", "one", amplitude=1.0), ctx.bg)
        out.append(ctx.from_comm(spec.name, wo.emt_divergence_residual(ctx.bg.geometry, ctx.jet(spec), V, "spacetime")))
    return out


@_reg("scalar_box.gks", "wave_operators.scalar_box_g",
      "|q|^2 box_g (Boyer-Lindquist) = -e4 e3 - trchb/2 e4 - trch/2 e3 + Lap + 2 etab.e", ["S0"], 1e-8, WV, criterion=6)
def _sbox_gks(ctx):
    return [ctx.from_comm(s.name, wo.scalar_box_routes(ctx.bg, ctx.jet(s))["gks"]) for s in ctx.fields("S0", False)]


@_reg("scalar_box.general", "wave_operators.scalar_box_frame",
      "box_g (Boyer-Lindquist) = g^{AB} (e_A e_B - Gamma_AB^C e_C)", ["S0"], 1e-8, WV, criterion=6)
def _sbox_gen(ctx):
    return [ctx.from_comm(s.name, wo.scalar_box_routes(ctx.bg, ctx.jet(s))["general"]) for s in ctx.fields("S0", False)]


def _make_potential(label: str, variant: str, expect: bool, anchor: str):
    def ev(ctx):
        return [ctx.from_comm(label, wo.potential_w_identities(ctx.bg, variant)[label])]

    suffix = ".uncorrected" if variant else ""
    register(IdentitySpec(f"potential.{label}{suffix}", "wave_operators.potential_w_identities", anchor, ("background",),
                          1e-9, ev, WV, expect_pass=expect, criterion=7 if expect else None))


_make_potential("ReW", "", True, "|q|^6 ReW polynomial = 4 Lambda^2 + trch trchb/2 - 10 omegab trch - 8 rho - ...")
_make_potential("ImW", "", True, "|q|^6 ImW polynomial = atrch trchb + atrchb trch - 10 omegab atrch + 4 *rho + 12 Lambda etab2 - 8 etab1 etab2")
_make_potential("W_box", "", True, "W from box_g(q/qbar)")
_make_potential("ImW", "uncorrected", False, "Im V with 3 e1(etab2) + 15 Lambda etab2 + 8 eta1 eta2 (uncorrected form)")


def _make_projection(label: str):
    def ev(ctx):
        return [ctx.from_comm(s.name, wo.projection_lemma_residuals(ctx.bg, ctx.jet(s))[label])
                for s in ctx.fields("S2", True, 2)]

    register(IdentitySpec(f"projection.{label}", "wave_operators.projection_lemma_residuals",
                          f"11-component projection of {label}", ("S2",), 1e-8, ev, WV, criterion=7))


for _p in ("nabla3", "nabla4", "nabla4_nabla3", "dd_hot_ddbar", "etab_grad", "H_Dbar"):
    _make_projection(_p)


@_reg("classical_teukolsky.chain", "wave_operators.classical_teukolsky_residual",
      "|q|^2 (box a - rhs(a)) = -(q/qbar) T(alpha), alpha = -(qbar/q) a", ["S0"], 1e-8, WV, criterion=7)
def _chain(ctx):
    return [ctx.from_comm(s.name, wo.classical_teukolsky_residual(ctx.bg, ctx.jet(s))) for s in ctx.fields("S0", False)]


def _transport(which: str, f_values: tuple[float, ...] | None, c_imag: float = -4.0):
    def ev(ctx):
        fs = f_values if f_values is not None else (ctx.f_const,)
        return [ctx.from_comm(f"f={f}", wo.transport_CD_residual(ctx.bg.geometry, f, c_imag)[which]) for f in fs]

    return ev


register(IdentitySpec("chandra.transport_C", "wave_operators.transport_CD_residual",
                      "(c)nabla_3 C + C/2 (trXb + conj trXb) - conj(trXb) trXb = 0", ("background",), 1e-9,
                      _transport("C", (0.0, 1.0)), WV, criterion=8))
register(IdentitySpec("chandra.transport_D", "wave_operators.transport_CD_residual",
                      "(c)nabla_3 D + D (trXb + conj trXb) - C/4 trXb conj(trXb) = 0", ("background",), 1e-9,
                      _transport("D", (0.0, 1.0)), WV, criterion=8))
register(IdentitySpec("chandra.transport_D.f_const", "wave_operators.transport_CD_residual",
                      "D transport for the configured constant f", ("background",), 1e-9,
                      _transport("D", None), WV, criterion=8))
register(IdentitySpec("chandra.transport_C.family", "wave_operators.transport_CD_residual",
                      "C transport for C = 2 trchb + 3i atrchb", ("background",), 1e-9,
                      _transport("C", (0.0,), 3.0), WV))


@_reg("remainder.schwarzschild", "wave_operators.projection_wave_remainder",
      "(box2 Psi)_11 - box_g psi - i (4/|q|^2)(cos/sin^2) Z psi + 4 cot^2/|q|^2 psi = 0 at a = 0",
      ["S2"], 1e-8, WV, measure="absolute", scope="schwarzschild", criterion=9)
def _rem0(ctx):
    return [ctx.from_abs(s.name, np.abs(wo.projection_wave_remainder(ctx.bg, ctx.jet(s)))) for s in ctx.fields("S2", True)]


@_reg("remainder.field_independence", "wave_operators.remainder_over_psi",
      "R(Psi_1)/psi_1 = R(Psi_2)/psi_2 pointwise", ["S2"], 1e-7, WV, measure="absolute", scope="rotating", criterion=9)
def _remfi(ctx):
    specs = ctx.fields("S2", True)
    base = wo.remainder_over_psi(ctx.bg, ctx.jet(specs[0]))
    out = []
    for s in specs[1:]:
        d = np.abs(wo.remainder_over_psi(ctx.bg, ctx.jet(s)) - base)
        out.append(ctx.from_abs(f"{specs[0].name}-{s.name}", np.nan_to_num(d, nan=0.0)))
    return out


@_reg("remainder.closed_form", "wave_operators.remainder_closed_form",
      "(box2 Psi)_11 = box_g psi + i (4/|q|^2)(cos/sin^2) Z psi - (4 cot^2/|q|^2 + 4 a^2 cos^2 (|q|^2 + 2 m r)/|q|^6) psi", ["S2"], 1e-8, WV)
def _remcf(ctx):
    return [ctx.from_comm(s.name, wo.remainder_identity(ctx.bg, ctx.jet(s))) for s in ctx.fields("S2", True)]


def _remainder_linearity(grid: GridSpec, seed: int, f_const: float) -> list[Measurement]:
    out = []
    by_m: dict[float, list[float]] = {}
    for m, a in grid.params:
        if a != 0:
            by_m.setdefault(m, []).append(a)
    for m, avals in by_m.items():
        avals = sorted(avals)
        for lo, hi in itertools.pairwise(avals):
            c_lo, c_hi = EvalContext(grid, m, lo, seed, f_const), EvalContext(grid, m, hi, seed, f_const)
            spec = c_lo.fields("S2", True)[0]
            res = wo.remainder_linearity(c_lo.bg, c_hi.bg, c_lo.jet(spec), c_hi.jet(spec))
            rel = np.nan_to_num(np.asarray(res.relative, float), nan=0.0)
            out.append(Measurement(f"a={lo}->{hi}", np.nan_to_num(np.asarray(res.residual, float), nan=0.0), rel,
                                   c_hi.point_rows))
    return out


register(IdentitySpec("remainder.linear_in_a", "wave_operators.remainder_linearity",
                      "R/psi at a_hi = (a_hi/a_lo) R/psi at a_lo (contract; the remainder is quadratic in a)",
                      ("S2",), 1e-6, _remainder_linearity, WV, scope="global", expect_pass=False, criterion=9))


@_reg("box2.constant_field", "wave_operators.constant_field_box",
      "frame-constant Psi at a = 0: (box2 Psi)_11 = -4 cot^2 / r^2 psi", ["background"], 1e-8, WV, scope="schwarzschild")
def _constfield(ctx):
    return [ctx.from_comm("psi0=1", wo.constant_field_box(ctx.bg))]


@_reg("rw.schwarzschild_coefficient", "wave_operators.rw_scalar_operator",
      "-(4/r^2)(1 - 2m/r) = trch trchb at a = 0", ["background"], 1e-9, WV, scope="schwarzschild")
def _rw(ctx):
    return [ctx.from_comm("radial", wo.rw_schwarzschild_check(ctx.bg))]


# --------------------------------------------------------------------- suites
SUITES = ("kerr-values", "random-tensor", "commutators", "wave", "all")


def suite_identities(suite: str) -> list[IdentitySpec]:
    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; available: {', '.join(SUITES)}")
    return [s for s in REGISTRY.values() if suite in s.suites]


# --------------------------------------------------------------------- report
@dataclass
class IdentityResult:
    id: str
    op: str
    anchor: str
    criterion: int | None
    measure: str
    tolerance: float
    max_abs_residual: float
    max_rel_residual: float
    max_residual: float
    argmax: dict
    n_points: int
    passed: bool
    expect_pass: bool

    @property
    def status(self) -> str:
        return "ok" if self.passed == self.expect_pass else "unexpected"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "op": self.op,
            "anchor": self.anchor,
            "criterion": self.criterion,
            "measure": self.measure,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "max_abs_residual": self.max_abs_residual,
            "max_rel_residual": self.max_rel_residual,
            "argmax": self.argmax,
            "n_points": self.n_points,
            "pass": self.passed,
            "expect_pass": self.expect_pass,
            "status": self.status,
        }


@dataclass
class Report:
    suite: str
    seed: int
    f_const: float
    grid: GridSpec
    results: list[IdentityResult]
    measurements: dict[str, list[Measurement]] = field(default_factory=dict, repr=False)

    @property
    def all_ok(self) -> bool:
        return all(r.status == "ok" for r in self.results)

    def result(self, identity_id: str) -> IdentityResult:
        for r in self.results:
            if r.id == identity_id:
                return r
        raise KeyError(identity_id)

    def to_dict(self) -> dict:
        n_pass = sum(r.passed for r in self.results)
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "f_const": self.f_const,
            "grid": self.grid.to_dict(),
            "environment": environment(),
            "conventions_hash": conventions_hash(),
            "summary": {
                "identities": len(self.results),
                "passed": n_pass,
                "failed": len(self.results) - n_pass,
                "unexpected": sum(r.status != "ok" for r in self.results),
                "expected_failures": sum(not r.expect_pass for r in self.results),
                "all_ok": self.all_ok,
            },
            "identities": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, default=_json_default) + "\n"

    def to_csv(self) -> str:
        """Per-point residuals: one row per identity, member and sample."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["identity", "label", "m", "a", "r", "theta", "abs_residual", "rel_residual"])
        for r in self.results:
            for meas in self.measurements.get(r.id, []):
                for row, ab, rl in zip(meas.points, meas.absolute, meas.relative):
                    w.writerow([r.id, meas.label, *(_fmt(x) for x in row), _fmt(ab), _fmt(rl)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else f"{x:.15g}"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serialisable: {type(o)}")


def conventions_hash() -> str:
    blob = json.dumps(wo.CONVENTIONS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def environment() -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.system(),
    }


def thread_count() -> int:
    raw = os.environ.get("KERRH_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return n


def _reduce(spec: IdentitySpec, meas: list[Measurement]) -> IdentityResult:
    best_val, best_arg = 0.0, {}
    max_abs = max_rel = 0.0
    n = 0
    for mm in meas:
        ab = np.nan_to_num(np.asarray(mm.absolute, float), nan=np.inf)
        rl = np.nan_to_num(np.asarray(mm.relative, float), nan=np.inf)
        n += ab.size
        if ab.size == 0:
            continue
        max_abs = max(max_abs, float(ab.max()))
        max_rel = max(max_rel, float(rl.max()))
        crit = rl if spec.measure == "relative" else ab
        k = int(np.argmax(crit))
        if crit[k] > best_val or not best_arg:
            best_val = float(crit[k])
            p = mm.points[k]
            best_arg = {
                "label": mm.label,
                "m": _num(p[0]),
                "a": _num(p[1]),
                "r": _num(p[2]),
                "theta": _num(p[3]),
            }
    return IdentityResult(
        id=spec.id,
        op=spec.op,
        anchor=spec.anchor,
        criterion=spec.criterion,
        measure=spec.measure,
        tolerance=spec.tolerance,
        max_abs_residual=max_abs,
        max_rel_residual=max_rel,
        max_residual=best_val,
        argmax=best_arg,
        n_points=n,
        passed=bool(best_val <= spec.tolerance),
        expect_pass=spec.expect_pass,
    )


def _num(x) -> float | None:
    x = float(x)
    return x if np.isfinite(x) else None


def _applies(spec: IdentitySpec, a: float) -> bool:
    if spec.scope == "schwarzschild":
        return a == 0
    if spec.scope == "rotating":
        return a != 0
    return spec.scope == "grid"


def run_suite(suite: str, grid: GridSpec | None = None, seed: int = DEFAULT_SEED, f_const: float = 0.0,
              threads: int | None = None) -> Report:
    """Evaluate every identity of ``suite`` and reduce to a report (ordered by registry and grid index)."""
    return _run(suite, suite_identities(suite), grid, seed, f_const, threads)


def run_suite_ids(ids: Iterable[str], grid: GridSpec | None = None, seed: int = DEFAULT_SEED, f_const: float = 0.0,
                  threads: int | None = None) -> Report:
    """Evaluate the listed identities only."""
    specs = []
    for i in ids:
        if i not in REGISTRY:
            raise UnknownSuite(f"unknown identity {i!r}")
        specs.append(REGISTRY[i])
    return _run("custom", specs, grid, seed, f_const, threads)


def _run(suite: str, specs: list[IdentitySpec], grid: GridSpec | None, seed: int, f_const: float,
         threads: int | None) -> Report:
    grid = default_grid() if grid is None else grid
    if not isinstance(grid, GridSpec):
        raise GridInvalid("grid must be a GridSpec")
    contexts = [EvalContext(grid, m, a, seed, f_const) for m, a in grid.params]
    for ctx in contexts:
        _ = ctx.bg.geometry  # surface guard errors before any work is scheduled

    def run_spec(spec: IdentitySpec) -> list[Measurement]:
        if spec.scope == "random":
            return spec.evaluate(contexts[0])
        if spec.scope == "global":
            return spec.evaluate(spec.grid or grid, seed, f_const)
        out: list[Measurement] = []
        for ctx in contexts:
            if _applies(spec, ctx.a):
                out.extend(spec.evaluate(ctx))
        return out

    n = threads if threads is not None else thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            meas = list(pool.map(run_spec, specs))
    else:
        meas = [run_spec(s) for s in specs]
    results = [_reduce(s, m) for s, m in zip(specs, meas)]
    return Report(suite, seed, f_const, grid, results, {s.id: m for s, m in zip(specs, meas)})


def write_report(report: Report, path: str, fmt: str = "json") -> None:
    text = report.to_json() if fmt == "json" else report.to_csv()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


__all__ = [
    "DEFAULT_SEED",
    "REGISTRY",
    "SCHEMA_VERSION",
    "SUITES",
    "EvalContext",
    "GridSpec",
    "IdentityResult",
    "IdentitySpec",
    "Measurement",
    "Report",
    "conventions_hash",
    "default_grid",
    "load_grid",
    "register",
    "run_suite",
    "run_suite_ids",
    "suite_identities",
    "thread_count",
    "write_report",
]
