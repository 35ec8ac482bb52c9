import json

import numpy as np
import pytest

from kerrh import verifier as vf
from kerrh.errors import GridInvalid, UnknownSuite


def small_grid(params=((1.0, 0.0), (1.0, 0.3), (1.0, 0.7))) -> vf.GridSpec:
    return vf.GridSpec(2.5, 20.0, 3, 0.4, 2.6, 3, params, ((0.0, 0), (0.3, 2), (0.7, -1)))


def test_registry_is_large_and_ops_resolve():
    import importlib

    assert len(vf.REGISTRY) >= 30
    for spec in vf.REGISTRY.values():
        mod, _, fn = spec.op.partition(".")
        assert hasattr(importlib.import_module(f"kerrh.{mod}"), fn), spec.op
        assert spec.tolerance > 0 and spec.anchor


def test_expected_failures_are_few_and_named():
    fails = [s.id for s in vf.REGISTRY.values() if not s.expect_pass]
    assert "remainder.linear_in_a" in fails
    assert all(("uncorrected" in f or "derived" in f or "spacetime" in f or f == "remainder.linear_in_a") for f in fails)


def test_default_grid_contents():
    g = vf.default_grid()
    a_values = {a for _, a in g.params}
    assert 0.0 in a_values and 0.95 in a_values
    th = g.thetas()
    assert th.min() > 0 and th.max() < np.pi


@pytest.mark.parametrize(
    "kwargs",
    [{"n_r": 0}, {"n_theta": 0}, {"params": ()}, {"theta_min": 0.0}, {"r_min": 1.0}, {"params": ((1.0, 1.2),)}],
)
def test_grid_invalid(kwargs):
    base = {"r_min": 2.5, "r_max": 20.0, "n_r": 3, "theta_min": 0.4, "theta_max": 2.6, "n_theta": 3, "params": ((1.0, 0.3),)}
    base.update(kwargs)
    with pytest.raises(GridInvalid):
        vf.GridSpec(**base)


def test_grid_roundtrip_and_load(tmp_path):
    g = small_grid()
    assert vf.GridSpec.from_dict(json.loads(json.dumps(g.to_dict()))) == g
    p = tmp_path / "grid.json"
    p.write_text(json.dumps(g.to_dict()))
    assert vf.load_grid(str(p)) == g
    p.write_text("{not json")
    with pytest.raises(GridInvalid):
        vf.load_grid(str(p))
    p.write_text(json.dumps({"r_min": 3}))
    with pytest.raises(GridInvalid):
        vf.load_grid(str(p))


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        vf.run_suite("nope")


@pytest.mark.parametrize("suite", ["kerr-values", "commutators", "wave"])
def test_suites_pass_on_small_grid(suite):
    report = vf.run_suite(suite, small_grid())
    bad = [(r.id, r.max_residual) for r in report.results if r.status != "ok"]
    assert not bad


def test_random_tensor_is_byte_deterministic():
    a = vf.run_suite("random-tensor", small_grid(), seed=11)
    b = vf.run_suite("random-tensor", small_grid(), seed=11, threads=1)
    assert a.to_csv() == b.to_csv()
    assert json.dumps([r.to_dict() for r in a.results]) == json.dumps([r.to_dict() for r in b.results])


def test_report_schema(tmp_path):
    report = vf.run_suite_ids(["curvature.P_oracle", "remainder.linear_in_a"], small_grid())
    d = report.to_dict()
    assert d["schema_version"] == vf.SCHEMA_VERSION
    assert set(d) >= {"suite", "seed", "grid", "environment", "conventions_hash", "summary", "identities"}
    ids = {e["id"]: e for e in d["identities"]}
    assert ids["curvature.P_oracle"]["pass"] and ids["curvature.P_oracle"]["status"] == "ok"
    lin = ids["remainder.linear_in_a"]
    assert lin["pass"] is False and lin["expect_pass"] is False and lin["status"] == "ok"
    assert report.all_ok
    out = tmp_path / "r.json"
    vf.write_report(report, str(out), "json")
    assert json.loads(out.read_text())["summary"]["identities"] == 2
    vf.write_report(report, str(tmp_path / "r.csv"), "csv")
    header = (tmp_path / "r.csv").read_text().splitlines()[0]
    assert header == "identity,label,m,a,r,theta,abs_residual,rel_residual"


def test_unexpected_failure_is_reported():
    spec = vf.IdentitySpec(
        "test.always_fails", "kerr_background.metric", "1 = 0", ("background",), 1e-9,
        lambda ctx: [ctx.from_abs("x", np.ones(ctx.bg.npts))], ("test-only",),
    )
    vf.register(spec)
    try:
        report = vf.run_suite_ids(["test.always_fails"], small_grid())
        assert not report.all_ok
        assert report.result("test.always_fails").status == "unexpected"
    finally:
        del vf.REGISTRY["test.always_fails"]


def test_conventions_hash_is_stable():
    assert vf.conventions_hash() == vf.conventions_hash()
    assert len(vf.conventions_hash()) == 64
