import json
import math

import pytest

from timingloop.cli import CAPACITY_SCHEMA, CODEC_COLUMNS, CODEC_SCHEMA, main
from timingloop.harness.config import SEED_ENV, ExperimentConfig, save_config
from timingloop.harness.episode import TRACE_COLUMNS, TRACE_SCHEMA


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], lines[1].split(","), [l.split(",") for l in lines[2:]]


def test_run_writes_trace_and_svg(tmp_path, capsys):
    out, svg = tmp_path / "t.csv", tmp_path / "t.svg"
    code = main(["run", "--horizon", "30", "--success-step", "30", "--seed", "1",
                 "--out", str(out), "--svg", str(svg)])
    assert code == 0
    schema, header, rows = read_csv(out)
    assert schema == f"# schema: {TRACE_SCHEMA}"
    assert header == list(TRACE_COLUMNS)
    assert len(rows) == 31
    assert svg.read_text().startswith("<svg")
    assert "success=" in capsys.readouterr().out


def test_run_with_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    save_config(ExperimentConfig(horizon=20, success_step=20, seed=5), cfg)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(cfg), "--horizon", "10", "--success-step", "10",
                 "--out", str(out2)]) == 0
    assert len(read_csv(out1)[2]) == 21 and len(read_csv(out2)[2]) == 11


def test_save_config_round_trip(tmp_path):
    saved = tmp_path / "eff.json"
    main(["run", "--horizon", "5", "--success-step", "5", "--seed", "2",
          "--out", str(tmp_path / "x.csv"), "--save-config", str(saved)])
    data = json.loads(saved.read_text())
    assert data["horizon"] == 5 and data["seed"] == 2


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "17")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--horizon", "10", "--success-step", "10", "--out", str(a)])
    main(["run", "--horizon", "10", "--success-step", "10", "--seed", "17", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bad_env_seed_is_an_error(monkeypatch, capsys):
    monkeypatch.setenv(SEED_ENV, "banana")
    assert main(["run", "--horizon", "3", "--success-step", "3", "--out", "/dev/null"]) == 2
    assert SEED_ENV in capsys.readouterr().err


def test_sweep(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code = main(["sweep", "--runs", "4", "--grid", "0.2,0.5", "--out", str(out),
                 "--svg", str(tmp_path / "s.svg")])
    assert code == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema: timingloop.sweep/v1"
    assert [float(r[0]) for r in rows] == [0.2, 0.5]
    assert capsys.readouterr().out.count("C=") == 2


def test_capacity_closed_form(capsys, tmp_path):
    out = tmp_path / "c.csv"
    assert main(["capacity", "--mean", "2", "--out", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert float(printed[1].split(",")[0]) == pytest.approx(1 / (2 * math.e), rel=1e-12)
    assert out.read_text().splitlines()[0] == f"# schema: {CAPACITY_SCHEMA}"


def test_capacity_geometric(capsys):
    assert main(["capacity", "--delay", "geometric", "--mean", "2", "--truncation", "60"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert 0 < float(row[0]) < 1 and row[3] == "True"


def test_codec_bench(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["codec-bench", "--n", "3", "--ratios", "0.5", "--trials", "20", "--seed", "1",
                 "--out", str(out)]) == 0
    schema, header, rows = read_csv(out)
    assert schema == f"# schema: {CODEC_SCHEMA}" and header == list(CODEC_COLUMNS)
    assert rows[0][:2] == ["3", "2"]


def test_estimate(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["estimate", "--a", "0.13", "--trials", "10", "--n-grid", "1,2",
                 "--out", str(out)]) == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema: timingloop.estimation/v1" and len(rows) == 2


def test_missing_field_in_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"a": 1.2}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
    assert "error:" in capsys.readouterr().err


def test_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{ not json")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_invalid_override(capsys):
    assert main(["run", "--eta", "-1"]) == 2
    assert "eta" in capsys.readouterr().err


def test_horizon_shorter_than_success_step(capsys):
    assert main(["run", "--horizon", "10"]) == 2
    assert "success_step" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["fly"])
    assert exc.value.code != 0
