import csv
import json
import subprocess
import sys

import pytest

from netexp.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


RUN_CONFIG = {
    "graph": {"kind": "watts_strogatz", "n": 60, "d": 4, "q": 0.2, "seed": 0},
    "model": {"kind": "benchmark", "c0": 1.0, "c1": 1.0, "c2": 0.1},
    "p": 0.3,
    "trials": 10,
    "seed": 7,
    "estimators": ["dm", "dn"],
}


def test_run_command_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path, RUN_CONFIG)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0

    with open(out / "trials.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10 * 2  # K trials x |estimators|
    assert {r["estimator"] for r in rows} == {"dm", "dn"}

    with open(out / "summary.csv") as fh:
        srows = list(csv.DictReader(fh))
    assert len(srows) == 2

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "run"
    assert manifest["config"]["seed"] == 7
    assert str(out / "trials.csv") in manifest["outputs"]
    captured = capsys.readouterr()
    assert "rmse=" in captured.out


def test_rerun_from_manifest_reproduces(tmp_path):
    cfg = write_config(tmp_path, RUN_CONFIG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", cfg, "--out", str(out1)])
    # re-run from the manifest's resolved config snapshot
    manifest = json.loads((out1 / "manifest.json").read_text())
    cfg2 = write_config(tmp_path, manifest["config"], name="snapshot.json")
    main(["run", "--config", cfg2, "--out", str(out2)])
    assert (out1 / "trials.csv").read_text() == (out2 / "trials.csv").read_text()


def test_flag_overrides_win(tmp_path):
    cfg = write_config(tmp_path, RUN_CONFIG)
    out = tmp_path / "out"
    main(["run", "--config", cfg, "--out", str(out), "--trials", "3", "--seed", "99"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 3
    assert manifest["config"]["seed"] == 99
    with open(out / "trials.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 3 * 2


def test_invalid_p_exits_2(tmp_path, capsys):
    bad = dict(RUN_CONFIG, p=1)
    cfg = write_config(tmp_path, bad)
    code = main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert "p=1 must lie in the open interval (0, 1)" in err


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err


def test_gen_graph_and_partition(tmp_path):
    out = tmp_path / "g"
    assert main(["gen-graph", "--kind", "watts_strogatz", "--n", "40",
                 "--degree", "4", "--q", "0.2", "--seed", "1",
                 "--out", str(out)]) == 0
    edge_path = out / "graph.edges"
    assert edge_path.exists()

    pout = tmp_path / "p"
    assert main(["gen-partition", "--graph", str(edge_path), "--kind",
                 "random_balanced", "--clusters", "8", "--seed", "2",
                 "--out", str(pout)]) == 0
    lines = [l for l in (pout / "partition.txt").read_text().splitlines() if l]
    assert len(lines) == 40


def test_sweep_command(tmp_path):
    config = {
        "graph": {"kind": "watts_strogatz", "n": 60, "d": 4, "q": 0.2, "seed": 0},
        "model": {"kind": "benchmark", "c2": 0.1},
        "p": 0.3, "trials": 10, "seed": 3,
        "estimators": ["dm", "dn_cluster"],
        "partitions": [
            {"id": "m5", "kind": "contiguous_blocks", "block_size": 5},
            {"id": "m15", "kind": "contiguous_blocks", "block_size": 15},
        ],
    }
    cfg = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    argmin = json.loads((out / "argmin.json").read_text())
    assert set(argmin) == {"dm", "dn_cluster"}
    assert set(argmin.values()) <= {"m5", "m15"}
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["partition_id"] for r in rows} == {"m5", "m15"}


def test_certify_bundled_suite(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["certify", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "PASS" in stdout and "FAIL" not in stdout
    certs = json.loads((out / "certificates.json").read_text())
    assert len(certs) == 12  # 4 instances x 3 checks


def test_certify_custom_config(tmp_path):
    config = {"instances": [{
        "name": "tiny",
        "graph": {"kind": "erdos_renyi", "n": 8, "expected_degree": 2.0, "seed": 0},
        "model": {"kind": "random_low_order", "seed": 5, "delta": 0.4},
        "p": 0.3,
        "checks": ["dn_bias", "dn_variance"],
    }]}
    cfg = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert main(["certify", "--config", cfg, "--out", str(out)]) == 0
    certs = json.loads((out / "certificates.json").read_text())
    assert len(certs) == 2


def test_rideshare_command(tmp_path):
    config = {
        "city": {"grid_width": 12, "grid_height": 12, "zone_cols": 3,
                 "zone_rows": 3, "fleet_size": 10, "horizon_min": 120.0,
                 "arrival_rate_per_min": 0.5},
        "policy": {"treatment_multiplier": 1.5},
        "durations": [15, 60], "p": 0.5, "trials": 3, "seed": 4,
    }
    cfg = write_config(tmp_path, config)
    out = tmp_path / "out"
    assert main(["rideshare", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "rideshare.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert {r["estimator"] for r in rows} == {"dm", "dn_cluster"}


def test_console_entry_point(tmp_path):
    result = subprocess.run([sys.executable, "-m", "netexp.cli", "certify",
                             "--out", str(tmp_path)],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "PASS" in result.stdout
