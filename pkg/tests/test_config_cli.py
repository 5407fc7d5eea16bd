import json
from pathlib import Path

import pytest

from firstloss import ConfigError, load_config
from firstloss.cli import main


def test_defaults_are_base_case():
    cfg = load_config(None)
    assert cfg.market.r == 0.02
    assert cfg.market.gamma == 0.40
    assert cfg.market.v0 == 1.0
    assert cfg.market.horizon_T == 1.0
    assert cfg.manager.a == 0.3 and cfg.manager.b == 0.65
    assert cfg.investor.a == 0.3 and cfg.investor.b == 0.65
    assert cfg.steps.dm == 0.0025 and cfg.steps.dalpha == 0.005 and cfg.steps.dc == 0.005
    assert cfg.steps.n_phi == 200


def test_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("[market]\nr = 0.04\ngamma = 0.5\n\n[manager]\nb = 2.5\n")
    cfg = load_config(path, {"market.r": "0.01", "run.seed": "7"})
    assert cfg.market.r == 0.01          # override beats the file
    assert cfg.market.gamma == 0.5
    assert cfg.manager.b == 2.5
    assert cfg.seed == 7


def test_config_errors_carry_field_path(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.cfg")
    path = tmp_path / "bad.cfg"
    path.write_text("[market]\nfoo = 1\n")
    with pytest.raises(ConfigError, match="market.foo"):
        load_config(path)
    path.write_text("[market]\ngamma = -0.4\n")
    with pytest.raises(ConfigError, match="gamma"):
        load_config(path)


def test_cli_value_golden(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--set", f"run.outdir={out}", "value", "--fee", "0,20,0"])
    assert code == 0
    doc = json.loads((out / "value.json").read_text())
    assert doc["phi_M"] == pytest.approx(2.2489, abs=1e-4)
    assert doc["config"]["market.r"] == "0.02"


def test_cli_missing_config_exits_1(tmp_path, capsys):
    code = main(["--config", str(tmp_path / "nope.cfg"), "value", "--fee", "0,20,0"])
    assert code == 1
    assert "nope.cfg" in capsys.readouterr().err


def test_cli_bad_fee_exits_1(tmp_path):
    code = main(["--set", f"run.outdir={tmp_path}", "value", "--fee", "1,2"])
    assert code == 1


def test_cli_envelope_and_wealth(tmp_path):
    out = tmp_path / "out"
    assert main(["--set", f"run.outdir={out}", "envelope", "--fee", "0,20,0"]) == 0
    lines = (out / "envelope.csv").read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "v,utility,envelope"
    assert main(["--set", f"run.outdir={out}", "wealth", "--fee", "5,10,26"]) == 0
    doc = json.loads((out / "wealth.json").read_text())
    assert doc["case"] == "B"
    assert doc["theta1"] == pytest.approx(1.05, abs=1e-12)


def test_cli_benchmark(tmp_path):
    out = tmp_path / "out"
    assert main(["--set", f"run.outdir={out}", "benchmark", "--fee", "5,35.5,26", "--pi", "1,0"]) == 0
    rows = [l for l in (out / "benchmark.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "pi,sharpe,phi_M,phi_I,degenerate"
    assert rows[2].endswith(",1")        # pi = 0 row flagged degenerate


def test_cli_frontier_byte_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[sweep]\ndm = 0.025\ndalpha = 0.05\ndc = 0.05\nn_phi = 4\n")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["--config", str(cfg), "--set", f"run.outdir={out1}", "frontier"]) == 0
    assert main(["--config", str(cfg), "--set", f"run.outdir={out2}", "frontier"]) == 0

    def strip_outdir(path):
        # the provenance header echoes run.outdir, which differs by design
        return [l for l in path.read_text().splitlines() if not l.startswith("# run.outdir")]

    assert strip_outdir(out1 / "frontier.csv") == strip_outdir(out2 / "frontier.csv")


def test_cli_preferred_with_floor(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[sweep]\ndm = 0.025\ndalpha = 0.05\ndc = 0.05\nn_phi = 4\n")
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--set", f"run.outdir={out}", "preferred", "--floor", "0,20,0"]) == 0
    doc = json.loads((out / "preferred.json").read_text())
    assert doc["found"] is True
    assert doc["phi_M"] >= 2.2489 - 1e-6


def test_cli_grid(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[sweep]\ndm = 0.025\ndalpha = 0.1\ndc = 0.1\n")
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--set", f"run.outdir={out}", "grid"]) == 0
    rows = [l for l in (out / "grid.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("m_pct,alpha_pct,c_pct")
    assert len(rows) - 1 == 3 * 5 * 4
