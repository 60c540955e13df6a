import json

import numpy as np
import pytest

from liquidball.cli import main
from liquidball.config import ConfigError, ScenarioConfig, load_config, parse_config


def write_cfg(tmp_path, name="cfg.json", **over):
    data = {
        "chart": {"type": "trap", "k": 0.1},
        "eos": {"c2": 1.0, "eps0": 1.0, "A": 1.0},
        "grid": {"kind": "radial", "n": 48, "h": 1.0 / 48},
        "init": {"amplitude": 1e-3, "mode": 1},
        "time": {"t_end": 0.25},
        "scenario": "oscillate",
        "seed": 7,
    }
    for key, val in over.items():
        if isinstance(val, dict) and key in data:
            data[key].update(val)
        else:
            data[key] = val
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_config_roundtrip(tmp_path):
    cfg = load_config(str(write_cfg(tmp_path)))
    assert cfg.chart_type == "trap"
    assert cfg.radius == pytest.approx(1.0)
    assert cfg.scenario == "oscillate"


def test_config_named_assumption_errors():
    with pytest.raises(ConfigError, match="sound-speed bound"):
        parse_config({"eos": {"c2": 2.0}})
    with pytest.raises(ConfigError, match="liquid boundary"):
        parse_config({"eos": {"eps0": -1.0}})
    with pytest.raises(ConfigError, match="trap-strength"):
        parse_config({"chart": {"k": -0.5}})
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config({"grid": {"spacing": 0.1}})
    with pytest.raises(ConfigError, match="grid too small"):
        parse_config({"grid": {"n": 4}})


def test_config_parse_error_names_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"chart": {"type": "trap",}}')
    with pytest.raises(ConfigError, match="line 1"):
        load_config(str(path))


def test_run_command_outputs(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    csv_text = (out / "energies.csv").read_text()
    header = [line for line in csv_text.splitlines() if not line.startswith("#")][0]
    assert header.split(",")[:4] == ["t", "R", "E0", "E00"]
    assert "taylor_delta_prime" in header
    assert "# config:" in csv_text
    assert "# assumptions:" in csv_text
    assert (out / "energies.plt").exists()
    assert "PASS" in (out / "summary.txt").read_text()


def test_run_static_energy_constant(tmp_path):
    cfg = write_cfg(tmp_path, scenario="static", init={"amplitude": 0.0})
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    rows = [line.split(",") for line in (out / "energies.csv").read_text().splitlines()
            if line and not line.startswith("#")]
    cols = rows[0]
    e0 = np.array([float(r[cols.index("E0")]) for r in rows[1:]])
    assert np.max(np.abs(e0 - e0[0])) / e0[0] < 1e-10


def test_run_deterministic_output(tmp_path):
    cfg = write_cfg(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "energies.csv").read_bytes() == (out2 / "energies.csv").read_bytes()


def test_bad_config_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, eos={"c2": 5.0})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_numerical_abort_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, time={"dt": 10.0, "t_end": 20.0})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_wave_command(tmp_path):
    cfg = write_cfg(tmp_path, chart={"type": "minkowski", "k": 0.0},
                    scenario="wave", grid={"n": 64, "h": 1.0 / 64},
                    time={"t_end": 4.0})
    out = tmp_path / "w"
    assert main(["wave", "--config", str(cfg), "--out", str(out)]) == 0
    text = (out / "wave.csv").read_text()
    assert text.splitlines()[2].startswith("#") is False
    summary = (out / "summary.txt").read_text()
    assert "frequency" in summary


def test_verify_single_suite(tmp_path):
    out = tmp_path / "v"
    rc = main(["verify", "--suite", "poin", "--out", str(out)])
    assert rc == 0
    lines = (out / "report.csv").read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "suite,instance,lhs,rhs,ratio,pass,order"
    assert any(l.startswith("poin,") for l in lines)


def test_report_json(tmp_path, capsys):
    cfg = write_cfg(tmp_path, time={"t_end": 0.05})
    out = tmp_path / "r"
    assert main(["report", "--config", str(cfg), "--out", str(out), "--json"]) == 0
    data = json.loads((out / "report.json").read_text())
    assert isinstance(data, list) and len(data) >= 2
    for key in ("t", "E0", "E00", "E11", "K1", "EW1", "E1", "lambda_max"):
        assert key in data[0]
