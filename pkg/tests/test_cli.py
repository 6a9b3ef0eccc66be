import json
from pathlib import Path

import jsonschema
import pytest

from lipsub import cli

ROOT = Path(__file__).resolve().parents[1]
SCHEMA = json.loads((ROOT / "docs" / "report.schema.json").read_text())
CONFIGS = sorted((ROOT / "configs").glob("*.json"))


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


def test_exit_ok(tmp_path, capsys):
    assert cli.main(["szlenk", "--model", "fan:8", "--eps", "1", "--out", str(tmp_path)]) == 0
    assert "verdict: Finite(2)" in capsys.readouterr().out
    assert report(tmp_path)["result"]["verdict"] == "Finite(2)"


def test_exit_fail_on_refused_construction(tmp_path, capsys):
    assert cli.main(["embed", "linf", "--norm", "hexagon", "--n", "2", "--out", str(tmp_path)]) == 1
    doc = report(tmp_path)
    assert doc["result"]["error"] == "FacesExceedCapacity"
    assert doc["checks"] == {"FacesExceedCapacity": False}
    assert "check FacesExceedCapacity: FAIL" in capsys.readouterr().out


def test_exit_usage_unknown_command(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"command": "nope"}))
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_exit_usage_bad_choice(tmp_path):
    status, outcome = cli.run({"command": "norm", "norm": "octagon"}, out_dir=str(tmp_path))
    assert status == 2 and outcome is None


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        cli.main(["szlenk", "--eps", "notanumber"])
    assert err.value.code == 2


def test_list_table(capsys):
    assert cli.main(["list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(cli.OPERATIONS) == 27
    ops = [op for op, _, _ in cli.list_commands()]
    assert len(set(ops)) == len(ops)
    assert any(line.startswith("c0-construct") for line in lines)
    assert any(line.startswith("quotient-check") for line in lines)
    for _, command, _ in cli.OPERATIONS:
        assert command.split()[0] in cli.COMMANDS


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "fan:8", "eps": 2.0}))
    assert cli.main(["szlenk", "--config", str(cfg), "--eps", "1", "--out", str(tmp_path / "o")]) == 0
    doc = report(tmp_path / "o")
    assert doc["config"]["eps"] == 1.0 and doc["config"]["model"] == "fan:8"


def test_config_file_overrides_defaults():
    cfg = cli.resolve("szlenk", {"eps": 0.5})
    assert cfg["eps"] == 0.5 and cfg["model"] == cli.defaults("szlenk")["model"]


def test_out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LIPSUB_OUT", str(tmp_path / "env"))
    assert cli.main(["faces", "--norm", "hexagon"]) == 0
    assert report(tmp_path / "env")["result"]["faces"] == 6


def test_bundle_files(tmp_path):
    assert cli.main(["szlenk", "--model", "fan:8", "--eps", "1", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"report.json", "metadata.json"} <= names
    assert any(n.endswith(".csv") for n in names) and any(n.endswith(".svg") for n in names)
    csv = next(p for p in tmp_path.iterdir() if p.suffix == ".csv").read_bytes()
    assert b"\r\n" in csv


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_shipped_configs_pass_and_match_schema(cfg, tmp_path):
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    jsonschema.validate(report(tmp_path), SCHEMA)


def test_refusal_report_matches_schema(tmp_path):
    cli.main(["embed", "linf", "--norm", "hexagon", "--n", "2", "--out", str(tmp_path)])
    jsonschema.validate(report(tmp_path), SCHEMA)


@pytest.mark.parametrize("argv", [
    ["derive", "--model", "cantor:4", "--eps", "0.25"],
    ["dyadic", "--depth", "3"],
    ["mazur", "--x", "0.6,-0.8", "--trials", "1000", "--pairs", "1000"],
    ["embed", "bumps", "--norm", "l1_2"],
])
def test_reruns_byte_identical(argv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(argv + ["--out", str(a)]) == 0
    assert cli.main(argv + ["--out", str(b)]) == 0
    for p in a.iterdir():
        if p.name != "metadata.json":
            assert p.read_bytes() == (b / p.name).read_bytes(), p.name
