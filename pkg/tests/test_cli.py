"""Command-line artifacts: exit codes, file contents, replay stability."""

import csv
import json
from pathlib import Path

import pytest

from qvqe.cli import main

H2 = "H2_d0.735"


def _artifact_pair(out_dir: Path, command: str):
    js = sorted(out_dir.glob(f"{command}-*.trace.json"))
    cs = sorted(out_dir.glob(f"{command}-*.csv"))
    assert len(js) == 1 and len(cs) == 1
    return js[0], cs[0]


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_unknown_method_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["run", "--fixture", H2, "--method", "bogus",
              "--out", str(tmp_path)])
    assert err.value.code == 2


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["explode"])
    assert err.value.code == 2


def test_missing_fixture_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["run", "--fixture", "XX_d9.99", "--out", str(tmp_path)])
    assert err.value.code == 2


def test_overlap_rejects_single_root(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["overlap", "--fixture", H2, "--roots", "1",
              "--out", str(tmp_path)])
    assert err.value.code == 2


def test_runtime_failure_maps_to_exit_1(tmp_path, capsys):
    code = main(["fci", "--fixture", H2, "--roots", "0",
                 "--out", str(tmp_path)])
    assert code == 1
    diag = json.loads(capsys.readouterr().err.strip())
    assert diag["command"] == "fci"
    assert diag["error"]


def test_run_uccsd_artifacts(tmp_path):
    assert main(["run", "--fixture", H2, "--method", "uccsd",
                 "--out", str(tmp_path)]) == 0
    jp, cp = _artifact_pair(tmp_path, "run")
    doc = json.loads(jp.read_text())
    meta = doc["meta"]
    assert meta["artifact_version"]
    assert meta["fixtures"][0]["label"] == H2
    assert len(meta["fixtures"][0]["sha256"]) == 64
    assert meta["config"]["method"] == "uccsd"
    assert meta["seeds"] == [0]
    rows = _read_csv(cp)
    assert rows[0][:4] == ["k", "block", "n_params", "energy"]
    final_err = float(rows[-1][5])
    assert abs(final_err) < 1e-8
    for row in doc["trace"]["rows"]:
        assert "wall_time" not in row


def test_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--fixture", H2, "--init", "random",
                     "--seeds", "5", "--out", str(out)]) == 0
    ja, ca = _artifact_pair(a, "run")
    jb, cb = _artifact_pair(b, "run")
    assert ja.name == jb.name and ca.name == cb.name
    assert ja.read_bytes() == jb.read_bytes()
    assert ca.read_bytes() == cb.read_bytes()


def test_init_alias_hf_resolves_to_hf_zero(tmp_path):
    assert main(["run", "--fixture", H2, "--init", "hf",
                 "--out", str(tmp_path)]) == 0
    jp, _ = _artifact_pair(tmp_path, "run")
    doc = json.loads(jp.read_text())
    assert doc["meta"]["config"]["init"] == "hf_zero"


def test_screen_lists_pool_blocks(tmp_path):
    assert main(["screen", "--fixture", H2, "--out", str(tmp_path)]) == 0
    _, cp = _artifact_pair(tmp_path, "screen")
    rows = _read_csv(cp)
    kinds = {row[2] for row in rows[1:]}
    assert kinds <= {"double_block", "single_block"}
    assert len(rows) > 2


def test_fci_spectrum_artifact(tmp_path):
    assert main(["fci", "--fixture", H2, "--roots", "3",
                 "--out", str(tmp_path)]) == 0
    jp, cp = _artifact_pair(tmp_path, "fci")
    rows = _read_csv(cp)
    assert len(rows) == 4
    assert float(rows[1][2]) == 0.0
    gaps = [float(r[2]) for r in rows[1:]]
    assert gaps == sorted(gaps)
    doc = json.loads(jp.read_text())
    assert doc["spectrum"]["fixture"] == H2


def test_landscape_records_seed_list(tmp_path):
    assert main(["landscape", "--fixture", H2, "--seeds", "0,1,2",
                 "--out", str(tmp_path)]) == 0
    jp, cp = _artifact_pair(tmp_path, "landscape")
    doc = json.loads(jp.read_text())
    assert doc["meta"]["seeds"] == [0, 1, 2]
    assert all(d["n_restarts"] == 3 for d in doc["depths"])
    rows = _read_csv(cp)
    n_depths = len(doc["depths"])
    assert len(rows) - 1 == 3 * n_depths
    spread = [abs(float(r[3]) - float(r[4])) for r in rows[1:]
              if int(r[0]) == 1]
    assert all(s < 1e-8 for s in spread)


def test_burrow_summary_columns(tmp_path):
    assert main(["burrow", "--fixture", H2, "--seeds", "0,1",
                 "--out", str(tmp_path)]) == 0
    jp, cp = _artifact_pair(tmp_path, "burrow")
    rows = _read_csv(cp)
    assert rows[0] == ["seed", "energy", "error_vs_fci", "n_params",
                       "n_cycles", "non_monotone_steps", "status"]
    assert [r[0] for r in rows[1:]] == ["0", "1"]
    doc = json.loads(jp.read_text())
    assert doc["n_within_accuracy"] == 2


def test_sweep_one_row_per_fixture(tmp_path):
    assert main(["sweep", "--fixture", f"{H2},{H2}", "--method", "uccsd",
                 "--workers", "2", "--out", str(tmp_path)]) == 0
    _, cp = _artifact_pair(tmp_path, "sweep")
    rows = _read_csv(cp)
    assert len(rows) == 3
    assert rows[1] == rows[2]


def test_overlap_traces_per_method(tmp_path):
    assert main(["overlap", "--fixture", H2,
                 "--method", "compass_pro,adapt_sd",
                 "--out", str(tmp_path)]) == 0
    jp, cp = _artifact_pair(tmp_path, "overlap")
    doc = json.loads(jp.read_text())
    assert set(doc["traces"]) == {"compass_pro", "adapt_sd"}
    for trace in doc["traces"].values():
        assert trace["rows"][-1]["overlap_gs"] > 0.999
        assert trace["gradient_trough"] is False
    rows = _read_csv(cp)
    methods = {r[0] for r in rows[1:]}
    assert methods == {"compass_pro", "adapt_sd"}
