import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from expfunc.cli import run
from expfunc.grids import read_csv, write_csv

SPECS = Path(__file__).resolve().parent.parent / "specs"


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_solve_density_gamma(tmp_path):
    out = tmp_path / "g.csv"
    code = run(["solve-density", "--spec", str(SPECS / "gamma_case_i.json"), "--grid-max", "20", "--grid-step", "1e-3",
                "-o", str(out)])
    assert code == 0
    cols, header = read_csv(out)
    assert header["version"] == "0.1.0" and len(header["spec_hash"]) == 16 and header["seed"] == 0
    assert header["grid"] == {"grid_max": 20.0, "grid_step": 0.001}
    assert cols["t"][-1] == pytest.approx(20.0)
    m = cols["t"] > 0.01
    assert np.max(np.abs(cols["f"][m] - stats.gamma(2.0).pdf(cols["t"][m]))) < 1e-3


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["simulate", "--spec", str(SPECS / "gamma_case_i.json"), "--samples", "500", "--seed", "4",
                    "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_class_poisson_is_not_selfdecomposable(capsys):
    code = run(["check-class", "--spec", str(SPECS / "poisson_law.json"), "--test", "selfdecomposable"])
    doc = _json(capsys)
    assert code == 2
    assert doc["report"]["outcome"] == "fail" and doc["report"]["witness"] > 0
    assert doc["header"]["spec_hash"]


def test_check_class_gamma_passes_everything(capsys):
    assert run(["check-class", "--spec", str(SPECS / "gamma_law.json")]) == 0
    tests = _json(capsys)["report"]["tests"]
    assert all(v["outcome"] == "pass" for v in tests.values())


def test_check_class_step_sd_fails_ggc(capsys):
    assert run(["check-class", "--spec", str(SPECS / "step_sd_law.json"), "--test", "ggc", "--order", "4"]) == 2
    assert _json(capsys)["report"]["outcome"] == "fail"


def test_verify_inverse_gamma(tmp_path, capsys):
    t = np.linspace(0, 50, 50001)
    f, df = np.zeros_like(t), np.zeros_like(t)
    p = t > 0
    f[p] = np.exp(-1 / t[p]) / t[p] ** 2
    df[p] = np.exp(-1 / t[p]) * (1 - 2 * t[p]) / t[p] ** 4
    good = tmp_path / "inverse_gamma.csv"
    write_csv(good, {"t": t, "f": f, "df": df}, {})
    assert run(["verify", "--spec", str(SPECS / "dufresne.json"), "--density", str(good), "--format", "json"]) == 0
    rep = _json(capsys)["report"]
    assert rep["max_abs_residual"] < 1e-6 and rep["derivative"] == "analytic"
    bad = tmp_path / "gamma.csv"
    write_csv(bad, {"t": t, "f": stats.gamma(2.0).pdf(t)}, {})
    assert run(["verify", "--spec", str(SPECS / "dufresne.json"), "--density", str(bad), "--format", "json"]) == 2
    assert "witness" in _json(capsys)["report"]


def test_check_range_methods(capsys):
    assert run(["check-range", "--spec", str(SPECS / "gamma_not_in_range.json")]) == 2
    assert _json(capsys)["report"]["verdict"] == "NotInRange"
    assert run(["check-range", "--spec", str(SPECS / "gamma_not_in_range.json"), "--method", "g1",
                "--format", "json"]) == 2
    rep = _json(capsys)["report"]
    assert rep["verdict"] == "ViolatedAt" and rep["witness"] == pytest.approx(3.42, abs=0.05)
    assert run(["check-range", "--spec", str(SPECS / "gamma_drift_range.json"), "--method", "g1"]) == 0
    out = capsys.readouterr().out
    assert "nu_eta_tail" in out
    assert run(["check-range", "--spec", str(SPECS / "ggc_brownian.json")]) == 2
    capsys.readouterr()


def test_cogarch_and_selfsim(tmp_path, capsys):
    out = tmp_path / "cg.csv"
    assert run(["cogarch", "--spec", str(SPECS / "cogarch_poisson.json"), "--grid-max", "20", "--grid-step", "1e-2",
                "-o", str(out)]) == 0
    cols, header = read_csv(out)
    assert header["measured_edge_exponent"] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(cols["F"]) >= -1e-12)
    assert run(["poisson-selfsim", "--spec", str(SPECS / "poisson_selfsim.json"), "--grid-step", "1e-2",
                "--samples", "5000", "--format", "json"]) == 0
    rep = _json(capsys)["report"]
    assert rep["converged"] and rep["ks_vs_simulation"] < 0.05


def test_mathematical_rejection_has_witness(tmp_path, capsys):
    spec = tmp_path / "ns.json"
    spec.write_text(json.dumps({"cogarch": {"beta": 1, "eta": 0.5, "phi": 1, "nuS": {
        "type": "CompoundPoisson", "rate": 1, "jumps": {"type": "point", "values": [1], "weights": [1]}}}}))
    assert run(["cogarch", "--spec", str(spec)]) == 2
    rep = _json(capsys)["report"]
    assert rep["error"] == "NotStationary" and rep["witness"] == pytest.approx(np.log(2))


def test_usage_errors(tmp_path, capsys):
    assert run(["solve-density", "--spec", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve-density", "--spec", str(bad)]) == 1
    assert run(["solve-density", "--spec", str(SPECS / "dufresne.json")]) == 1
    with pytest.raises(SystemExit) as info:
        run(["solve-density", "--spec", str(SPECS / "gamma_case_i.json"), "--grid-step", "-1"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        run(["no-such-command"])
    assert info.value.code == 1
    capsys.readouterr()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "expfunc", "check-class", "--spec", str(SPECS / "poisson_law.json"),
                        "--test", "selfdecomposable"], capture_output=True, text=True)
    assert r.returncode == 2 and json.loads(r.stdout)["report"]["outcome"] == "fail"
