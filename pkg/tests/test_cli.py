from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from clusterkit.cli import main


def run(args, capsys):
    code = main(args)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.mark.parametrize("w,b,cls,want", [(2, 1, "two", 1), (2, 1, "af", 2), (2, 0, "af", 1)])
def test_graph_counts(w, b, cls, want, capsys):
    code, out, _ = run(["graphs", "count", "--white", str(w), "--black", str(b), "--class", cls], capsys)
    assert code == 0 and out.split()[0] == str(want)


def test_cap_exceeded(capsys):
    code, _, err = run(["graphs", "count", "--white", "2", "--black", "9", "--class", "af"], capsys)
    assert code == 2 and json.loads(err)["exit_code"] == 2


def test_coeff_c2_zero_outside(capsys):
    code, out, _ = run(["coeff", "c2", "--k", "0", "--r", "1.5"], capsys)
    assert code == 0 and "value=0 " in out


def test_coeff_virial_rod(capsys):
    code, out, _ = run(["coeff", "virial", "--m", "1", "--kind", "hard_rod"], capsys)
    assert code == 0 and "value=-2 " in out and "(-2)" in out


def test_missing_potential(capsys, tmp_path):
    code, _, err = run(["coeff", "virial", "--m", "1", "--potential", str(tmp_path / "nope.ini")], capsys)
    payload = json.loads(err)
    assert code == 2 and payload["error"] == "ConfigError"


def test_potential_ini(capsys, tmp_path):
    f = tmp_path / "rod.ini"
    f.write_text("[potential]\nkind = hard_rod\nsigma = 2\n")
    code, out, _ = run(["coeff", "virial", "--m", "1", "--potential", str(f)], capsys)
    assert code == 0 and "value=-4 " in out


def test_usage_error(capsys):
    code, _, err = run(["coeff", "nonsense"], capsys)
    assert code == 2 and "error" in json.loads(err)


def test_numerical_failure(capsys):
    code, _, err = run(["py", "solve", "--rho", "3.0", "--dr", "0.01", "--n-points", "800"], capsys)
    assert code == 3 and json.loads(err)["error"] == "DensityTooHighError"


def test_verify_cancellation(capsys):
    code, out, _ = run(["verify", "cancellation", "--max-vertices", "5"], capsys)
    assert code == 0 and json.loads(out)["pass"]


def test_verify_oz_k0(capsys):
    code, out, _ = run(["verify", "oz", "--k", "0"], capsys)
    rep = json.loads(out)
    assert code == 0 and all(c["residual"] == 0 for c in rep["checks"])


def test_verify_dissymmetry_exact(capsys):
    code, out, _ = run(["verify", "dissymmetry", "--order", "3", "--exact-1d"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["exact"] and all(c["residual"] == "0" for c in rep["checks"])


def test_identity_census_literal_fails(capsys):
    code, out, _ = run(["identity", "census", "--k", "3"], capsys)
    assert code == 1 and not json.loads(out)["pass"]
    code, out, _ = run(["identity", "census", "--k", "3", "--with-labels"], capsys)
    assert code == 0


def test_outputs_carry_manifest(capsys, tmp_path):
    code, _, _ = run(["coeff", "h2", "--k", "1", "--r-grid", "0:1:0.5", "--out", str(tmp_path)], capsys)
    assert code == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    for name in man["provenance"][-1]["files"]:
        text = (tmp_path / name).read_text()
        if name.endswith(".csv"):
            assert text.splitlines()[0] == f"# manifest {man['manifest']}"
        else:
            assert json.loads(text)["manifest"] == man["manifest"]


def test_thread_count_does_not_change_output(capsys, tmp_path):
    base = ["coeff", "h2", "--k", "2", "--r", "0.5", "1.5", "--samples", "5000", "--seed", "7"]
    run(base + ["--threads", "1", "--out", str(tmp_path / "a")], capsys)
    run(base + ["--threads", "2", "--out", str(tmp_path / "b")], capsys)
    for name in ("coeff_h2.csv", "coeff_h2.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rerun_is_byte_identical(capsys, tmp_path):
    code, _, _ = run(["coeff", "h2", "--k", "2", "--r", "0.5", "--samples", "5000", "--seed", "3",
                      "--out", str(tmp_path / "a")], capsys)
    assert code == 0
    code, _, _ = run(["rerun", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")], capsys)
    assert code == 0
    for f in (tmp_path / "a").iterdir():
        if f.name != "manifest.json":
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CLUSTERKIT_SEED", "42")
    run(["coeff", "h2", "--k", "1", "--r", "0.5", "--out", str(tmp_path)], capsys)
    assert json.loads((tmp_path / "manifest.json").read_text())["seed"] == 42


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[mc]\nseed = 5\nsamples = 1000\n[potential]\nkind = hard_rod\n")
    run(["coeff", "virial", "--m", "2", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path / "o")], capsys)
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["seed"] == 9 and man["config"]["mc"]["n_samples"] == 1000


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "clusterkit.cli", "graphs", "count", "--white", "2", "--black", "1",
                          "--class", "af"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "2"
