import io
import json
import subprocess
import sys

import pytest

from kerrh import verifier as vf
from kerrh.cli import QUANTITIES, format_complex, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def small_grid_file(tmp_path, params=((1.0, 0.0), (1.0, 0.5))):
    g = vf.GridSpec(2.5, 20.0, 3, 0.4, 2.6, 2, params, ((0.0, 0), (0.3, 2)))
    p = tmp_path / "grid.json"
    p.write_text(json.dumps(g.to_dict()))
    return str(p), g


def test_eval_trX_on_horizon():
    code, out, _ = run("eval", "trX", "--m", "1", "--a", "0", "--r", "2", "--theta", "1.5708")
    assert code == 0
    assert out.startswith("trX = 1+0i")
    assert "2/q" in out


def test_eval_P_and_Xi():
    code, out, _ = run("eval", "P", "--m", "1", "--a", "0", "--r", "3", "--theta", "1.0")
    assert code == 0 and out.startswith("P = -0.0740740740740741+0i")
    code, out, _ = run("eval", "Xi", "--a", "0.7", "--r", "5", "--theta", "0.8")
    assert code == 0 and all("= 0+0i" in line for line in out.splitlines())


def test_eval_omegab_on_horizon():
    code, out, _ = run("eval", "omegab", "--r", "2", "--theta", "1.0")
    assert code == 0 and out.startswith("omegab = 0.25+0i")


def test_every_quantity_evaluates():
    for name in QUANTITIES:
        code, out, err = run("eval", name, "--a", "0.4", "--r", "4", "--theta", "1.2")
        assert code == 0, (name, err)
        assert "nan" not in out


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "nonsense", "--r", "3", "--theta", "1"),
        ("eval", "P", "--r", "1.5", "--theta", "1"),
        ("eval", "C", "--r", "2", "--theta", "1"),
        ("eval", "P", "--r", "3", "--theta", "0"),
        ("eval", "P", "--a", "1.5", "--r", "3", "--theta", "1"),
        ("verify", "--suite", "unknown"),
        ("verify", "--a", "1.5", "--m", "1"),
        ("verify", "--grid-file", "/nonexistent/grid.json"),
        ("table", "nonsense"),
        ("bogus",),
    ],
)
def test_config_errors_exit_2(argv):
    code, _, _ = run(*argv)
    assert code == 2


def test_format_complex_is_locale_independent():
    assert format_complex(-2 / 27) == "-0.0740740740740741+0i"
    assert format_complex(complex(1.5, -0.25)) == "1.5-0.25i"
    assert format_complex(-0.0) == "0+0i"


def test_verify_writes_report_and_exits_zero(tmp_path):
    grid, _ = small_grid_file(tmp_path)
    out = tmp_path / "rep.json"
    code, text, _ = run("verify", "--suite", "kerr-values", "--grid-file", grid, "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["summary"]["all_ok"] and rep["suite"] == "kerr-values"
    assert "unexpected" in text


def test_verify_param_override_and_csv(tmp_path):
    grid, _ = small_grid_file(tmp_path)
    out = tmp_path / "rep.csv"
    code, _, _ = run("verify", "--suite", "kerr-values", "--grid-file", grid, "--a", "0.3", "--out", str(out),
                     "--format", "csv")
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("identity,label,m,a")
    assert all(r.split(",")[3] == "0.3" for r in rows[1:])


def test_table_quantity_csv_row_count(tmp_path):
    grid, g = small_grid_file(tmp_path)
    code, text, _ = run("table", "ReW", "--grid-file", grid, "--a", "0")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "m,a,r,theta,component,re,im"
    assert len(lines) - 1 == g.n_r * g.n_theta


def test_table_json_roundtrips_grid(tmp_path):
    grid, g = small_grid_file(tmp_path)
    out = tmp_path / "t.json"
    code, _, _ = run("table", "P", "--grid-file", grid, "--format", "json", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == vf.SCHEMA_VERSION
    assert vf.GridSpec.from_dict(doc["grid"]) == g
    assert len(doc["rows"]) == g.npts * len(g.params)


def test_table_identity(tmp_path):
    grid, _ = small_grid_file(tmp_path)
    code, text, _ = run("table", "curvature.P_oracle", "--grid-file", grid)
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "label,m,a,r,theta,abs_residual,rel_residual"
    assert all(float(l.split(",")[-1]) <= 1e-9 for l in lines[1:])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kerrh", "eval", "q", "--a", "0.5", "--r", "3", "--theta", "1.0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("q = 3+0.270151152934")
