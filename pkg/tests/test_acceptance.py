"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""

import json
import os
import subprocess
import sys
import time

import pytest
from conftest import ACCEPTANCE_LINES

from kerrh import verifier as vf


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def worst(report: vf.Report, ids) -> tuple[float, str]:
    rows = [(report.result(i).max_residual / report.result(i).tolerance, i) for i in ids]
    _, i = max(rows)
    return report.result(i).max_residual, i


def all_pass(report: vf.Report, ids) -> bool:
    return all(report.result(i).passed for i in ids)


@pytest.fixture(scope="module")
def full_report() -> vf.Report:
    return vf.run_suite("all", vf.default_grid())


def test_criterion_01_frame_and_background():
    ids = ["frame.normalisation", "ricci.two_route", "curvature.two_route", "kerr.vanishing",
           "null_structure", "bianchi.P"]
    t0 = time.perf_counter()
    report = vf.run_suite_ids(ids, vf.default_grid())
    elapsed = time.perf_counter() - t0
    ok = all_pass(report, ids) and all(report.result(i).tolerance <= 1e-9 for i in ids) and elapsed < 10
    res, which = worst(report, ids)
    record(1, ok, f"worst {which} {res:.2e} <= 1e-9, runtime {elapsed:.1f} s < 10 s")
    assert ok


def test_criterion_02_algebra(full_report):
    ids = [i for i in vf.REGISTRY if i.startswith("algebra.")]
    n = min(r.n_points for r in (full_report.result(i) for i in ids))
    ok = all_pass(full_report, ids) and n >= vf.RANDOM_SAMPLES and len(ids) >= 10
    res, which = worst(full_report, ids)
    record(2, ok, f"{len(ids)} groups x {vf.RANDOM_SAMPLES} samples, worst {which} {res:.2e} <= 1e-13")
    assert ok


def test_criterion_03_P_oracle(full_report):
    r = full_report.result("curvature.P_oracle")
    ok = r.passed and r.tolerance <= 1e-9
    record(3, ok, f"P from Riemann vs -2m/q^3, max relative {r.max_residual:.2e} <= 1e-9")
    assert ok


def test_criterion_04_q_calculus(full_report):
    r = full_report.result("q.equations")
    spins = sorted({a for _, a in full_report.grid.params})
    ok = r.passed and r.tolerance <= 1e-10 and 0.95 in spins
    labels = {m.label for m in full_report.measurements["q.equations"]}
    record(4, ok, f"{len(labels)} q-equation residuals, max {r.max_residual:.2e} <= 1e-10, spins {spins}")
    assert ok and len(labels) >= 5


def test_criterion_05_commutators(full_report):
    ids = [i for i in vf.REGISTRY if i.startswith("comm.") and not i.endswith(".uncorrected")]
    fields = min(len({m.label for m in full_report.measurements[i]}) for i in ids)
    ok = all_pass(full_report, ids) and fields >= 3
    res, which = worst(full_report, ids)
    record(5, ok, f"{len(ids)} commutators x >= {fields} fields, worst {which} {res:.2e} <= 1e-8")
    assert ok


def test_criterion_06_wave_equivalences(full_report):
    ids = ["box2.item1", "box2.item3", "box2.complex", "box2.conformal", "dd_hot_ddbar", "gauss_s2",
           "scalar_box.gks", "scalar_box.general"]
    ok = all_pass(full_report, ids)
    res, which = worst(full_report, ids)
    record(6, ok, f"{len(ids)} two-form identities, worst {which} {res:.2e} <= 1e-8")
    assert ok


def test_criterion_07_projection_chain(full_report):
    pots = ["potential.ReW", "potential.ImW", "potential.W_box"]
    chain = [i for i in vf.REGISTRY if i.startswith("projection.")] + ["classical_teukolsky.chain",
                                                                       "teukolsky.projection"]
    ok = all_pass(full_report, pots + chain) and all(full_report.result(i).tolerance <= 1e-9 for i in pots)
    rp, wp = worst(full_report, pots)
    rc, wc = worst(full_report, chain)
    record(7, ok, f"potentials worst {wp} {rp:.2e} <= 1e-9; projections/chain worst {wc} {rc:.2e} <= 1e-8")
    assert ok


def test_criterion_08_chandrasekhar(full_report):
    ids = ["chandra.transport_C", "chandra.transport_D", "chandra.qf_rescale"]
    labels = {m.label for m in full_report.measurements["chandra.transport_D"]}
    ok = all_pass(full_report, ids) and {"f=0.0", "f=1.0"} <= labels
    rt, _ = worst(full_report, ids[:2])
    rq = full_report.result("chandra.qf_rescale").max_residual
    record(8, ok, f"C, D transport for f in {{0, 1}} max {rt:.2e} <= 1e-9; qf rescale {rq:.2e} <= 1e-8")
    assert ok


def test_criterion_09_projection_remainder():
    grid = vf.GridSpec(2.2, 50.0, 24, 0.15, 3.14159265 - 0.15, 12, ((1.0, 0.0), (1.0, 0.3), (1.0, 0.7)),
                       ((0.0, 0), (0.3, 2), (0.7, -1)))
    report = vf.run_suite_ids(["remainder.schwarzschild", "remainder.field_independence",
                               "remainder.linear_in_a"], grid)
    zero = report.result("remainder.schwarzschild")
    indep = report.result("remainder.field_independence")
    lin = report.result("remainder.linear_in_a")
    ok = zero.passed and indep.passed and lin.passed
    record(9, ok, f"a=0 remainder {zero.max_residual:.2e} <= 1e-8; field independence {indep.max_residual:.2e}"
                  f" <= 1e-7; linear in a (0.3 -> 0.7) {lin.max_residual:.2e} vs 1e-6"
                  f"{'' if lin.passed else ' (remainder is quadratic in a)'}")
    assert zero.passed and indep.passed
    assert lin.max_residual <= 1e-6, "remainder over psi does not scale linearly in a"


def test_criterion_10_verify_all(tmp_path, full_report):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    t0 = time.perf_counter()
    p1 = subprocess.run([sys.executable, "-m", "kerrh", "verify", "--out", str(out1)], capture_output=True, text=True,
                        check=False)
    elapsed = time.perf_counter() - t0
    p2 = subprocess.run([sys.executable, "-m", "kerrh", "verify", "--out", str(out2)], capture_output=True, text=True,
                        env={**os.environ, "KERRH_THREADS": "1"}, check=False)
    d1, d2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    same = d1["identities"] == d2["identities"] and d1["identities"] == full_report.to_dict()["identities"]
    ok = p1.returncode == 0 and p2.returncode == 0 and elapsed < 120 and same
    record(10, ok, f"verify all exit {p1.returncode}, {elapsed:.1f} s < 120 s, "
                   f"{d1['summary']['identities']} identities, deterministic across runs/threads: {same}")
    assert ok
