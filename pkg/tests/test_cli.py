import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from thinlayer import cli, transmission

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).parent / "golden"


def _table(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _numeric(rows, columns):
    return np.array([[float(r[c]) for c in columns] for r in rows])


def _config(tmp_path, **changes):
    data = json.loads((CONFIGS / "coated_disk.json").read_text())
    data.update(changes)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def _assert_matches_golden(produced, golden):
    got, want = _table(produced), _table(golden)
    assert list(got[0]) == list(want[0]) and len(got) == len(want)
    columns = [c for c in want[0] if c not in ("check", "passed")]
    np.testing.assert_allclose(_numeric(got, columns), _numeric(want, columns), rtol=1e-9, atol=1e-14)


@pytest.fixture(scope="module")
def coated_disk_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("coated_disk")
    code = cli.main(["run", "--config", str(CONFIGS / "coated_disk.json"), "--out-dir", str(out), "--quiet"])
    return code, out


def test_coated_disk_passes_and_matches_oracle(coated_disk_run):
    code, out = coated_disk_run
    assert code == cli.EXIT_OK
    for row in _table(out / "oracle.csv"):
        assert float(row["value"]) <= 1e-8 and row["passed"] == "True"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and set(summary["tasks"]) == set(json.loads(
        (CONFIGS / "coated_disk.json").read_text())["tasks"])


@pytest.mark.parametrize("name", ["theorem11", "theorem12_0", "theorem12_1", "oracle"])
def test_coated_disk_matches_golden(coated_disk_run, name):
    _assert_matches_golden(coated_disk_run[1] / f"{name}.csv", GOLDEN / "coated_disk" / f"{name}.csv")


def test_coated_disk_output_columns(coated_disk_run):
    out = coated_disk_run[1]
    assert list(_table(out / "solution.csv")[0]) == ["x", "y", "region", "u_x", "u_y", "H_x", "H_y",
                                                     "scattered_x", "scattered_y"]
    jumps = _table(out / "jumps.csv")
    assert list(jumps[0]) == ["n_nodes", "relation", "side", "violation"]
    assert {r["side"] for r in jumps} == {"exterior", "interior"}
    assert list(_table(out / "identities.csv")[0]) == ["identity", "violation", "tolerance", "passed", "source"]


def test_kite_theorem11_matches_golden(tmp_path):
    code = cli.main(["run", "--config", str(CONFIGS / "kite_theorem11.json"), "--out-dir", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_OK
    _assert_matches_golden(tmp_path / "theorem11.csv", GOLDEN / "kite_theorem11" / "theorem11.csv")


def test_zero_contrast_errors_vanish(tmp_path):
    code = cli.main(["run", "--config", str(CONFIGS / "zero_contrast.json"), "--out-dir", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_OK
    rows = _table(tmp_path / "theorem11.csv")
    assert _numeric(rows, ["e0", "e1"]).max() <= 1e-9
    assert _numeric(_table(tmp_path / "theorem12_0.csv"), ["remainder"]).max() <= 1e-9
    scattered = _numeric(_table(tmp_path / "solution.csv"), ["scattered_x", "scattered_y"])
    assert np.abs(scattered).max() <= 1e-9


def test_console_script_reports_config_errors(tmp_path):
    path = _config(tmp_path, epsilon_ladder=[0.1])
    proc = subprocess.run([sys.executable, "-m", "thinlayer.cli", "solve", "--config", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_CONFIG
    assert "epsilon_ladder" in proc.stderr


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(transmission, "MAX_CONDITION", 1.0)
    code = cli.main(["solve", "--config", str(_config(tmp_path)), "--out-dir", str(tmp_path), "--n-nodes", "64"])
    assert code == cli.EXIT_SOLVER
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "error" in summary["tasks"]["solve"]


def test_failed_certification_exit_code(tmp_path):
    path = _config(tmp_path, thresholds={"oracle": 1e-20})
    code = cli.main(["oracle-compare", "--config", str(path), "--out-dir", str(tmp_path), "--n-nodes", "64"])
    assert code == cli.EXIT_FAILED


def test_point_source_inside_measurement_curve(tmp_path):
    fields = [{"kind": "kelvin_point_source", "source": [1.5, 0.0], "column": 0}]
    path = _config(tmp_path, measurement={"radius_scale": 2.0, "n_nodes": 64, "fields": fields})
    code = cli.main(["certify-thm12", "--config", str(path), "--out-dir", str(tmp_path), "--n-nodes", "64"])
    assert code == cli.EXIT_CONFIG


def test_runs_are_byte_identical_and_honour_node_override(tmp_path):
    args = ["solve", "--config", str(CONFIGS / "coated_disk.json"), "--n-nodes", "64", "--quiet"]
    for name in ("a", "b"):
        assert cli.main(args + ["--out-dir", str(tmp_path / name)]) == cli.EXIT_OK
    first = (tmp_path / "a" / "solution.csv").read_bytes()
    assert first == (tmp_path / "b" / "solution.csv").read_bytes()
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    overridden = cli.load_config(CONFIGS / "coated_disk.json", 64)
    assert overridden.n_nodes == 64
    with pytest.raises(cli.ConfigError, match="n_nodes"):
        cli.load_config(CONFIGS / "coated_disk.json", 63)
