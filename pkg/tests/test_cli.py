import csv
import io
import json

import pytest

from twistbench import cli
from twistbench.witness import WitnessReport


def run(args, capsys):
    rc = cli.main(args)
    out, err = capsys.readouterr()
    return rc, out, err


def test_ground_witness(capsys):
    rc, out, _ = run(["ground-witness"], capsys)
    rep = json.loads(out)
    assert rc == 0 and rep["schema"] == "1" and rep["ok"]
    assert rep["report"]["C"] == 2.0 and rep["report"]["exp_twist"] == -1.0


def test_ground_witness_nested(capsys):
    rc, out, _ = run(["ground-witness", "--no-intersect"], capsys)
    assert rc == 0 and json.loads(out)["report"]["C"] == 0.0


def test_ground_witness_sizing_error(capsys):
    rc, out, err = run(["ground-witness", "--diameter", "20"], capsys)
    assert rc == 2 and out == "" and "region" in err


def test_ground_witness_wrong_value_is_status_one(capsys, monkeypatch):
    monkeypatch.setattr(cli, "twist_pairing", lambda s, p: WitnessReport(1.0, 1.0, 0.0, 1.0))
    rc, _, _ = run(["ground-witness", "--lattice", "8x8"], capsys)
    assert rc == 1


def test_validation_errors(capsys):
    assert run(["ground-witness", "--lattice", "8by8"], capsys)[0] == 2
    assert run(["ground-witness", "--lattice", "7x7"], capsys)[0] == 2
    assert run(["ground-witness", "--shots", "0"], capsys)[0] == 2
    assert run(["noise-sweep", "--noise", "0.5,0.5,0.5"], capsys)[0] == 2
    assert run(["noise-sweep", "--sweep", "0,2"], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lattice": {"width": 8, "height": 8},
                               "loop": {"diameter": 4, "d_sep": 4, "region": 6}, "seed": 3}))
    rc, out, _ = run(["ground-witness", "--config", str(cfg)], capsys)
    rep = json.loads(out)
    assert rc == 0 and rep["config"]["width"] == 8 and rep["report"]["region_side"] == 6
    rc, out, _ = run(["ground-witness", "--config", str(cfg), "--lattice", "16x16",
                      "--diameter", "8", "--dsep", "8", "--region", "12"], capsys)
    assert rc == 0 and json.loads(out)["report"]["n_qubits"] == 256
    cfg.write_text(json.dumps({"lattice": {"width": 8, "height": 8}, "colour": "red"}))
    rc, _, err = run(["ground-witness", "--config", str(cfg)], capsys)
    assert rc == 2 and "colour" in err
    rc, _, err = run(["ground-witness", "--config", str(tmp_path / "missing.json")], capsys)
    assert rc == 2


def test_sweep_parsing():
    assert cli._parse_sweep("0:0.02:0.01") == [0.0, 0.01, 0.02]
    assert cli._parse_sweep("0.001, 0.05") == [0.001, 0.05]
    with pytest.raises(cli.InputError):
        cli._parse_sweep("a:b")


SMALL = ["--lattice", "8x8", "--shots", "600", "--seed", "5"]


def test_noise_sweep_csv(tmp_path, capsys):
    rc, out, _ = run(["noise-sweep", *SMALL, "--sweep", "0,0.01,0.03"], capsys)
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == cli.NOISE_COLUMNS
    assert rows[0]["C"] == "2.0" and rows[0]["delta_hat"] == "0.0"
    assert all(r["consistent"] == "true" and r["schema"] == "1" for r in rows)
    assert [float(r["px"]) for r in rows] == pytest.approx([0.0, 0.01 / 3, 0.01])


def test_noise_sweep_workers_identical(tmp_path, capsys):
    outs = []
    for w in ("1", "3"):
        path = tmp_path / f"w{w}.csv"
        rc, _, _ = run(["noise-sweep", *SMALL, "--shots", "2500", "--sweep", "0.01,0.02",
                        "--workers", w, "--out", str(path)], capsys)
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_noise_sweep_json(capsys):
    rc, out, _ = run(["noise-sweep", *SMALL, "--noise", "0.01,0,0", "--format", "json"], capsys)
    rep = json.loads(out)
    assert rc == 0 and rep["schema"] == "1" and len(rep["rows"]) == 1
    assert rep["rows"][0]["px"] == 0.01 and "workers" not in rep["config"]


def test_depth_sweep(capsys):
    rc, out, _ = run(["depth-sweep", "--lattice", "8x8", "--depths", "0,1,2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rc == 0 and [r["D"] for r in rows] == ["0", "1", "2"]
    assert rows[0]["C"] == "0.0" and rows[0]["exp_Q"] == "1.0"
    assert "eps_hat_stderr" in rows[0] and "region_energy_stderr" in rows[0]


def test_depth_sweep_is_reproducible(capsys):
    args = ["depth-sweep", "--lattice", "8x8", "--depths", "3", "--noise", "0.01,0.01,0.01",
            "--shots", "300"]
    assert run(args, capsys)[1] == run(args, capsys)[1]


def test_depth_sweep_rejects_rate_sweep(capsys):
    rc, _, err = run(["depth-sweep", "--lattice", "8x8", "--sweep", "0.01"], capsys)
    assert rc == 2 and "sweep" in err


def test_bound(capsys):
    rc, out, _ = run(["bound", "--eps", "1e-4", "--R-size", "1", "-D", "3"], capsys)
    rep = json.loads(out)["report"]
    assert rc == 0 and rep["depth_lower"] == pytest.approx(5.5941, abs=1e-3)
    assert rep["witness_upper"] == pytest.approx(2 * 0.01 * (9 + 48))
    rc, out, _ = run(["bound", "--eps", "0", "--lattice", "16x16"], capsys)
    assert json.loads(out)["report"]["depth_lower"] == 16.0
    rc, out, err = run(["bound", "--eps", "0.3", "--R-size", "1"], capsys)
    assert rc == 2 and "√(|R|ε) < 1/2" in err
    assert run(["bound"], capsys)[0] == 2


def test_oracle_check_statuses(capsys, caplog, monkeypatch):
    rc, out, _ = run(["oracle-check", "--scale", "0.01", "--inject-fault"], capsys)
    assert rc == 1 and "engine_vs_dense" in caplog.text and not json.loads(out)["ok"]
    rc, _, err = run(["oracle-check", "--lattice", "4x4"], capsys)
    assert rc == 2 and "cap" in err
    monkeypatch.setenv("TWISTBENCH_CAP_QUBITS", "4")
    assert run(["oracle-check", "--scale", "0.01"], capsys)[0] == 2
