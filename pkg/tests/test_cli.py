import csv
import json

import pytest

from extractkit.cli import COMMANDS, main, read_config

FAST = {"approximate": ["--corpus", "40"]}


def run(tmp_path, cmd, *extra):
    out = tmp_path / cmd
    code = main([cmd, "--dim", "32", "--out", str(out), *FAST.get(cmd, []), *extra])
    return code, out


@pytest.mark.parametrize("cmd", COMMANDS)
def test_subcommand_reports(tmp_path, cmd, capsys):
    code, out = run(tmp_path, cmd)
    assert code == 0
    name = cmd.replace("-", "_")
    payload = json.loads((out / f"{name}.json").read_text())
    assert payload["command"] == cmd and payload["config"]["dim"] == 32
    raw = (out / f"{name}.csv").read_bytes()
    assert raw.endswith(b"\r\n")
    rows = list(csv.reader(raw.decode().splitlines()))
    assert len(rows) >= 2
    assert json.loads(capsys.readouterr().out) == {"command": cmd, "ok": True}


def test_approximate_csv_header(tmp_path):
    _, out = run(tmp_path, "approximate")
    with open(out / "approximate.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["sample_id", "err", "eps_budget", "sigma_min", "verdict"]


@pytest.mark.parametrize("cmd", ["approximate", "flatten", "invariants"])
def test_deterministic(tmp_path, cmd):
    # same --out both times, since the report records its config
    name = cmd.replace("-", "_")
    first = {}
    for _ in range(2):
        _, out = run(tmp_path, cmd, "--seed", "7")
        for ext in ("json", "csv"):
            data = (out / f"{name}.{ext}").read_bytes()
            assert first.setdefault(ext, data) == data


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\ndim = 32\nseed = 3  # inline\neps-base = 0.2\ncorpus = 30\n")
    assert read_config(cfg)["eps_base"] == "0.2"
    out = tmp_path / "o"
    assert main(["approximate", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == 0
    conf = json.loads((out / "approximate.json").read_text())["config"]
    assert conf["seed"] == 5 and conf["eps_base"] == 0.2 and conf["corpus"] == 30


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert main(["invariants", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    rec = json.loads((tmp_path / "invariants.error.json").read_text())
    assert rec["clause"] == "cli.config"


def test_bad_dim_exit(tmp_path, capsys):
    code = main(["extract-point", "--dim", "30", "--out", str(tmp_path)])
    assert code == 1
    rec = json.loads(capsys.readouterr().err)
    assert rec["command"] == "extract-point" and rec["error"] == "DomainError"
    assert (tmp_path / "extract_point.error.json").exists()
    assert not (tmp_path / "extract_point.json").exists()


def test_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
