"""Command-line front end: ``eval``, ``verify`` and ``table``.

Exit codes: 0 success (all identities behave as expected), 1 at least one
identity failed unexpectedly, 2 configuration error (bad flags, unknown suite
or quantity, invalid grid, point inside a guard band).
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from . import connection_curvature as cc
from . import verifier as vf
from . import wave_operators as wo
from .errors import (
    AxisOrHorizonProximity,
    GridInvalid,
    KerrhError,
    PointRejected,
    UnknownQuantity,
    UnknownSuite,
)
from .kerr_background import Background

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------- quantities
@dataclass(frozen=True)
class Quantity:
    """A named background quantity with its closed-form anchor.

    ``literal`` quantities are polynomial/rational in ``(q, Delta)`` without a
    ``1/Delta``; they may be evaluated on the horizon itself.
    """

    anchor: str
    evaluate: Callable[[Background, float], dict[str, np.ndarray]]
    literal: bool = True


def _ricci(bg: Background):
    return cc.ricci_jets_closed_form(bg)


def _scalar(fn):
    return lambda bg, f: {"": np.asarray(fn(bg, f))}


def _vector(fn):
    def ev(bg, f):
        v = np.asarray(fn(bg, f))
        return {"[1]": v[0], "[2]": v[1]}

    return ev


def _sym(fn):
    def ev(bg, f):
        v = np.asarray(fn(bg, f))
        return {"[11]": v[0, 0], "[12]": v[0, 1]}

    return ev


QUANTITIES: dict[str, Quantity] = {
    "trX": Quantity("trX = 2/q", _scalar(lambda bg, f: _ricci(bg).trX.value)),
    "trXb": Quantity("trXb = -2 Delta q / |q|^4", _scalar(lambda bg, f: _ricci(bg).trXb.value)),
    "trch": Quantity("trch = 2 r / |q|^2", _scalar(lambda bg, f: _ricci(bg).trch.value)),
    "atrch": Quantity("atrch = 2 a cos(theta) / |q|^2", _scalar(lambda bg, f: _ricci(bg).atrch.value)),
    "trchb": Quantity("trchb = -2 r Delta / |q|^4", _scalar(lambda bg, f: _ricci(bg).trchb.value)),
    "atrchb": Quantity("atrchb = 2 a Delta cos(theta) / |q|^4", _scalar(lambda bg, f: _ricci(bg).atrchb.value)),
    "H": Quantity("H = eta + i *eta, H_1 = a sin(theta) q / |q|^3 times i (anti-self-dual 1-form)",
                  _vector(lambda bg, f: _ricci(bg).H.value)),
    "Hb": Quantity("Hb = -a sin(theta) qbar / |q|^3 times i, Hb = -Z", _vector(lambda bg, f: _ricci(bg).Hb.value)),
    "Z": Quantity("Z = -Hb", _vector(lambda bg, f: _ricci(bg).Z.value)),
    "Xi": Quantity("Xi = 0 on Kerr", _vector(lambda bg, f: _ricci(bg).Xi.value)),
    "Xib": Quantity("Xib = 0 on Kerr", _vector(lambda bg, f: _ricci(bg).Xib.value)),
    "Xhat": Quantity("Xhat = 0 on Kerr", _sym(lambda bg, f: _ricci(bg).Xhat.value)),
    "Xbhat": Quantity("Xbhat = 0 on Kerr", _sym(lambda bg, f: _ricci(bg).Xbhat.value)),
    "omega": Quantity("omega = 0 in the principal frame", _scalar(lambda bg, f: _ricci(bg).omega.value)),
    "omegab": Quantity("omegab = (a^2 cos^2 (r - m) + m r^2 - a^2 r) / |q|^4",
                       _scalar(lambda bg, f: _ricci(bg).omegab.value)),
    "P": Quantity("P = -2m / q^3", _scalar(lambda bg, f: cc.P_closed_form(bg).value)),
    "rho": Quantity("rho = Re P", _scalar(lambda bg, f: cc.P_closed_form(bg).value.real)),
    "rho_dual": Quantity("*rho = Im P", _scalar(lambda bg, f: cc.P_closed_form(bg).value.imag)),
    "q": Quantity("q = r + i a cos(theta)", _scalar(lambda bg, f: bg.q.value)),
    "Delta": Quantity("Delta = r^2 - 2 m r + a^2", _scalar(lambda bg, f: bg.delta.value)),
    "Lambda": Quantity("Lambda = (r^2 + a^2) cot(theta) / |q|^3", _scalar(lambda bg, f: wo.potential_w(bg).Lambda)),
    "C": Quantity("C = 2 trchb - 4i atrchb", _scalar(lambda bg, f: wo.chandra_coeffs(bg.geometry, f).C.value), False),
    "D": Quantity("D = 1/2 trchb^2 + f atrchb^2 - 2i trchb atrchb",
                  _scalar(lambda bg, f: wo.chandra_coeffs(bg.geometry, f).D.value), False),
    "ReW": Quantity("|q|^6 ReW = (4 cot^2 - 2) r^4 + ...", _scalar(lambda bg, f: wo.potential_w(bg).ReW)),
    "ImW": Quantity("|q|^6 ImW = a cos(theta) (-12 r^3 + 4 m r^2 - 12 r a^2 cos^2 + 12 m a^2 cos^2)",
                    _scalar(lambda bg, f: wo.potential_w(bg).ImW)),
    "W": Quantity("W = ReW + i ImW", _scalar(lambda bg, f: wo.potential_w(bg).W)),
    "remainder": Quantity("R/psi = -4 a^2 cos^2 (|q|^2 + 2 m r) / |q|^6",
                          _scalar(lambda bg, f: wo.remainder_closed_form(bg))),
    "rw_radial": Quantity("-(4/|q|^2)(1 - 2m/r)", _scalar(lambda bg, f: wo.rw_radial_coefficient(bg))),
}


def format_complex(z: complex) -> str:
    """Locale-independent 15-significant-digit rendering ``re+imi``."""
    z = complex(z)
    re = 0.0 if z.real == 0 else z.real
    im = 0.0 if z.imag == 0 else z.imag
    return f"{re:.15g}{im:+.15g}i"


def evaluate_quantity(name: str, m: float, a: float, r, theta, f_const: float = 0.0) -> dict[str, np.ndarray]:
    if name not in QUANTITIES:
        raise UnknownQuantity(f"unknown quantity {name!r}; available: {', '.join(sorted(QUANTITIES))}")
    try:
        bg = Background(m, a, r, theta, horizon_guard=not QUANTITIES[name].literal)
    except AxisOrHorizonProximity as exc:
        raise PointRejected(str(exc)) from exc
    return QUANTITIES[name].evaluate(bg, f_const)


# ------------------------------------------------------------------- parsing
def _add_params(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--m", type=float, default=None if not required else 1.0, help="mass (default 1)")
    p.add_argument("--a", type=float, default=None if not required else 0.0, help="spin, |a| < m (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrh", description="Kerr horizontal-structure identities")
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="evaluate a background quantity at one point")
    pe.add_argument("quantity", help=f"one of: {', '.join(sorted(QUANTITIES))}")
    _add_params(pe, True)
    pe.add_argument("--r", type=float, required=True, help="Boyer-Lindquist radius")
    pe.add_argument("--theta", type=float, required=True, help="polar angle in radians")
    pe.add_argument("--f-const", type=float, default=0.0, help="free constant in D (default 0)")

    pv = sub.add_parser("verify", help="run a verification suite and write a report")
    pv.add_argument("--suite", default="all", help=f"one of: {', '.join(vf.SUITES)} (default all)")
    _add_params(pv, False)
    pv.add_argument("--grid-file", default=None, help="JSON grid description (default: built-in grid)")
    pv.add_argument("--seed", type=int, default=vf.DEFAULT_SEED, help=f"random seed (default {vf.DEFAULT_SEED})")
    pv.add_argument("--f-const", type=float, default=0.0, help="free constant in D (default 0)")
    pv.add_argument("--out", default="report.json", help="report path (default report.json)")
    pv.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default json)")

    pt = sub.add_parser("table", help="per-point table of a quantity or identity residual over a grid")
    pt.add_argument("quantity", help="a quantity name (see eval) or a registered identity id")
    _add_params(pt, False)
    pt.add_argument("--grid-file", default=None, help="JSON grid description (default: built-in grid)")
    pt.add_argument("--seed", type=int, default=vf.DEFAULT_SEED, help="random seed for identity tables")
    pt.add_argument("--f-const", type=float, default=0.0, help="free constant in D (default 0)")
    pt.add_argument("--out", default=None, help="output path (default: standard output)")
    pt.add_argument("--format", choices=("json", "csv"), default="csv", help="table format (default csv)")
    return parser


class ConfigError(Exception):
    pass


def _check_params(m: float | None, a: float | None) -> None:
    if m is not None and not m > 0:
        raise ConfigError(f"--m must be positive, got {m}")
    if a is not None and abs(a) >= (1.0 if m is None else m):
        raise ConfigError(f"|a| = {abs(a)} must be below m (superextremal spin rejected)")


def _grid(args) -> vf.GridSpec:
    grid = vf.load_grid(args.grid_file) if args.grid_file else vf.default_grid()
    if args.m is not None or args.a is not None:
        m = 1.0 if args.m is None else args.m
        a = 0.0 if args.a is None else args.a
        grid = grid.with_params([(m, a)])
    return grid


# ------------------------------------------------------------------ commands
def cmd_eval(args, out) -> int:
    _check_params(args.m, args.a)
    q = QUANTITIES.get(args.quantity)
    vals = evaluate_quantity(args.quantity, args.m, args.a, args.r, args.theta, args.f_const)
    for suffix, v in vals.items():
        out.write(f"{args.quantity}{suffix} = {format_complex(np.ravel(v)[0])}    [{q.anchor}]\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    _check_params(args.m, args.a)
    grid = _grid(args)
    report = vf.run_suite(args.suite, grid, seed=args.seed, f_const=args.f_const)
    vf.write_report(report, args.out, args.format)
    d = report.to_dict()["summary"]
    for r in report.results:
        mark = "ok " if r.status == "ok" else "BAD"
        verdict = "pass" if r.passed else ("fail (expected)" if not r.expect_pass else "FAIL")
        out.write(f"{mark} {r.id:44s} {r.max_residual:10.3e} <= {r.tolerance:.0e}  {verdict}\n")
    out.write(
        f"{d['identities']} identities, {d['passed']} passed, {d['failed']} failed "
        f"({d['expected_failures']} expected), {d['unexpected']} unexpected; report: {args.out}\n"
    )
    return EXIT_OK if report.all_ok else EXIT_FAIL


def table_rows(name: str, grid: vf.GridSpec, seed: int, f_const: float) -> tuple[list[str], list[list]]:
    """Header and rows of a per-point table for a quantity or an identity id."""
    if name in QUANTITIES:
        header = ["m", "a", "r", "theta", "component", "re", "im"]
        rows = []
        for m, a in grid.params:
            r, th = grid.points(m)
            vals = evaluate_quantity(name, m, a, r, th, f_const)
            for k in range(r.size):
                for suffix, v in vals.items():
                    z = complex(np.ravel(v)[k])
                    rows.append([m, a, float(r[k]), float(th[k]), suffix or "-", z.real, z.imag])
        return header, rows
    if name in vf.REGISTRY:
        spec = vf.REGISTRY[name]
        report = vf.run_suite_ids([spec.id], grid, seed=seed, f_const=f_const)
        header = ["label", "m", "a", "r", "theta", "abs_residual", "rel_residual"]
        rows = []
        for meas in report.measurements[spec.id]:
            for p, ab, rl in zip(meas.points, meas.absolute, meas.relative):
                rows.append([meas.label, *(float(x) for x in p), float(ab), float(rl)])
        return header, rows
    raise UnknownQuantity(f"{name!r} is neither a quantity nor a registered identity")


def _cell(x) -> str:
    if isinstance(x, float):
        return "" if not np.isfinite(x) else f"{x:.15g}"
    return str(x)


def cmd_table(args, out) -> int:
    _check_params(args.m, args.a)
    grid = _grid(args)
    header, rows = table_rows(args.quantity, grid, args.seed, args.f_const)
    if args.format == "csv":
        text = ",".join(header) + "\n" + "".join(",".join(_cell(x) for x in row) + "\n" for row in rows)
    else:
        doc = {
            "schema_version": vf.SCHEMA_VERSION,
            "quantity": args.quantity,
            "grid": grid.to_dict(),
            "columns": header,
            "rows": [[None if isinstance(x, float) and not np.isfinite(x) else x for x in row] for row in rows],
        }
        text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    handler = {"eval": cmd_eval, "verify": cmd_verify, "table": cmd_table}[args.command]
    try:
        return handler(args, out)
    except (ConfigError, UnknownSuite, UnknownQuantity, GridInvalid, PointRejected) as exc:
        err.write(f"kerrh: error: {exc}\n")
        return EXIT_CONFIG
    except (KerrhError, OSError) as exc:
        err.write(f"kerrh: error: {exc}\n")
        return EXIT_CONFIG
