import json
import subprocess
import sys

import pytest

from qcontract.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_budget(capsys):
    code, out = run(capsys, "budget", "--mode", "sampled")
    doc = json.loads(out.out)
    assert code == 0 and doc["N"] == 13680 and doc["n_O"] == 2280


def test_budget_nonpositive_margin(capsys):
    code, out = run(capsys, "budget", "--C", "3.73")
    assert code == 1 and "epsilon" in out.err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["budget", "--family", "tier9"])
    assert exc.value.code == 1


def test_fingerprint_and_calibrate(tmp_path, capsys):
    paths = []
    for i, alpha in enumerate(["0,0", "0.05,0", "0,0.04"]):
        out = tmp_path / f"t{i}"
        code, _ = run(capsys, "fingerprint", "--exact", "--channel", "drift",
                      "--drift-alpha", alpha, "--out", str(out))
        assert code == 0
        paths.append(str(out / "fingerprint.json"))
    code, out = run(capsys, "calibrate", *paths)
    doc = json.loads(out.out)
    assert code == 0 and not doc["empty"]


def test_verify_exit_codes(capsys):
    code, out = run(capsys, "verify", "--channel", "honest", "--rounds", "20")
    assert code == 0 and json.loads(out.out)["verdict"] == "accept"
    code, out = run(capsys, "verify", "--channel", "sneaky", "--rounds", "100")
    assert code == 2 and json.loads(out.out)["verdict"] == "halt"


def test_framebound(capsys):
    code, out = run(capsys, "framebound", "--restarts", "5")
    assert code == 0 and abs(json.loads(out.out)["C_estimate"] - 3 ** 0.5) < 0.01


def test_experiment_writes_artifacts(tmp_path, capsys):
    code, out = run(capsys, "experiment", "detection", "--exact", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "run.json").exists() and (tmp_path / "table_verdicts.csv").exists()
    assert "complete,6" in out.out


def test_experiment_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "trials": 0}))
    code, out = run(capsys, "experiment", "sample", "--config", str(cfg))
    assert code == 1 and "trials" in out.err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qcontract", "budget"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["N"] == 3420
