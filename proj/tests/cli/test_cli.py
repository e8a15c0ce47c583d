import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("SNLEVY_CLI", "snlevy")
MODELS = Path(os.environ.get("SNLEVY_MODELS", Path(__file__).resolve().parents[2] / "models"))


def run(*args, check=None):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True)
    if check is not None:
        assert p.returncode == check, p.stderr + p.stdout
    return p


def test_inspect_subcritical():
    p = run("inspect", "--model", MODELS / "B1.json", "--beta", 0.45, check=0)
    report = json.loads(p.stdout[: p.stdout.rindex("}") + 1])
    assert report["regime"] == "Subcritical"
    assert report["exponent"] == pytest.approx(1.3162277660168379 / 0.6837722339831621)


def test_inspect_non_extinct_warns():
    p = run("inspect", "--model", MODELS / "B1.json", "--beta", 0.7, check=0)
    assert "warning" in p.stderr.lower()


def test_scale_table(tmp_path):
    out = tmp_path / "w.csv"
    run("scale", "--model", MODELS / "J1.json", "--q", -0.2, "--x-max", 5, "--points", 11, "--out", out, check=0)
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 11
    assert list(rows[0]) == ["x", "w_q", "z_q", "w_tilted"]
    assert float(rows[0]["w_q"]) == 0.0


def test_fluct_mean():
    p = run("fluct", "--model", MODELS / "B1.json", "--beta", 0.45, "--a", 1, "--x", 3, check=0)
    j = json.loads(p.stdout)
    assert j["mean"] == pytest.approx(1.98133772245875, rel=1e-12)


def test_simulate_is_reproducible(tmp_path):
    common = ["simulate", "--model", MODELS / "J1.json", "--beta", 0.2, "--replicates", 3000, "--seed", 9]
    run(*common, "--workers", 1, "--out", tmp_path / "a", check=0)
    run(*common, "--workers", 3, "--out", tmp_path / "b", check=0)
    a = (tmp_path / "a" / "dataset.csv").read_bytes()
    assert a == (tmp_path / "b" / "dataset.csv").read_bytes()
    assert a.startswith(b"replicate,z0,max_pos,total_particles,censored\n")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["replicates"] == 3000
    assert summary["quantity"] == "Z_0"
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["master_seed"] == 9


def test_estimate(tmp_path):
    run("simulate", "--model", MODELS / "B1.json", "--beta", 0.45, "--replicates", 20000, "--seed", 4,
        "--out", tmp_path, check=0)
    p = run("estimate", "--in", tmp_path, "--n-min", 2, "--n-max", 30, "--points", 8, "--x-min", 2,
            "--x-max", 5, check=0)
    j = json.loads(p.stdout)
    assert j["mode"] == "subcritical"
    assert 1.0 < j["tail"]["exponent"] < 3.0
    assert (tmp_path / "curve.csv").read_text().startswith("n,surv,ci_lo,ci_hi,count\n")


def test_exit_codes(tmp_path):
    assert run("simulate", "--model", MODELS / "B1.json", "--beta", 0.7, "--out", tmp_path / "x").returncode == 3
    assert run("simulate", "--model", MODELS / "drift_up.json", "--beta", 0.1,
               "--out", tmp_path / "y").returncode == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"drift": -1, "sigma_sq": 1, "colour": "red"}')
    assert run("inspect", "--model", bad, "--beta", 0.1).returncode == 2
    assert run("inspect", "--beta", 0.1).returncode == 2
    assert run("nonsense").returncode == 2
    assert run("psi").returncode == 2
    assert run("--help").returncode == 0
    p = run("simulate", "--model", MODELS / "B1.json", "--beta", 0.5, "--replicates", 2000, "--cap", 10,
            "--out", tmp_path / "c")
    assert p.returncode == 0
    assert json.loads((tmp_path / "c" / "summary.json").read_text())["censored"] > 0


def test_estimate_without_enough_data(tmp_path):
    run("simulate", "--model", MODELS / "B1.json", "--beta", 0.45, "--replicates", 50, "--seed", 1,
        "--out", tmp_path, check=0)
    assert run("estimate", "--in", tmp_path).returncode == 2


def test_verify_quick(tmp_path):
    p = run("verify", "--model", MODELS / "J1.json", "--level", "quick", "--out", tmp_path)
    assert p.returncode in (0, 1)
    lines = [l for l in p.stdout.splitlines() if l.startswith("[")]
    assert len(lines) == 13
    report = json.loads((tmp_path / "report.json").read_text())
    status = {r["id"]: r["status"] for r in report["results"]}
    assert all(status[i] == "skip" for i in (7, 8, 9, 10))
    assert all(status[i] == "pass" for i in (1, 2, 3, 11, 12, 13))
    assert report["passed"] == (p.returncode == 0)
