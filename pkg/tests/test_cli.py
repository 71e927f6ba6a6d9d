import json

import pytest

from edgeoffload import cli
from edgeoffload.domain import config_to_dict
from edgeoffload.errors import InvariantViolation

from conftest import make_config


@pytest.fixture
def config_path(tmp_path):
    data = config_to_dict(make_config(sampling="poisson", poisson_mean=10.0, slots=20))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def test_validate_ok(config_path, capsys):
    assert cli.main(["validate", "--config", str(config_path)]) == 0
    assert "config ok" in capsys.readouterr().out


def test_validate_bad_config_exits_1(config_path, capsys):
    code = cli.main(["validate", "--config", str(config_path),
                     "--set", "weight_theta=1.5"])
    assert code == 1
    assert "weight_theta out of [0,1]" in capsys.readouterr().out


def test_validate_preset_name():
    assert cli.main(["validate", "--config", "paper"]) == 0


def test_run_is_reproducible(config_path, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        code = cli.main(["run", "--config", str(config_path), "--policy", "ldso",
                         "--seed", "7", "--out", str(out), "--name", "r"])
        assert code == 0
    assert (out_a / "r.csv").read_bytes() == (out_b / "r.csv").read_bytes()
    assert (out_a / "r.json").read_bytes() == (out_b / "r.json").read_bytes()


def test_run_embeds_overridden_config(config_path, tmp_path):
    code = cli.main(["run", "--config", str(config_path), "--out", str(tmp_path),
                     "--name", "r", "--set", "control_v=42.0"])
    assert code == 0
    meta = json.loads((tmp_path / "r.json").read_text())
    assert meta["config"]["control_v"] == 42.0


def test_override_unknown_path_exits_64(config_path):
    assert cli.main(["validate", "--config", str(config_path),
                     "--set", "no.such.key=1"]) == 64


def test_unknown_subcommand_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 64


def test_unknown_flag_exits_64(config_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--config", str(config_path), "--frobnicate"])
    assert exc.value.code == 64


def test_sweep_grid_and_summary(config_path, tmp_path, capsys):
    # axis accepted case-insensitively (control_V spelling)
    code = cli.main(["sweep", "--config", str(config_path), "--axis", "control_V",
                     "--values", "10,100,1000", "--policy", "ldso,cost-only",
                     "--seeds", "1", "--out", str(tmp_path), "--jobs", "1"])
    assert code == 0
    assert len(list(tmp_path.glob("*.csv"))) == 7  # 6 runs + summary
    assert (tmp_path / "sweep_summary.csv").exists()
    out = capsys.readouterr().out
    assert "6 runs (0 failed)" in out


def test_summarize(config_path, tmp_path, capsys):
    cli.main(["run", "--config", str(config_path), "--out", str(tmp_path),
              "--name", "one"])
    cli.main(["run", "--config", str(config_path), "--seed", "9",
              "--out", str(tmp_path), "--name", "two"])
    code = cli.main(["summarize", "--inputs", str(tmp_path / "*.json"),
                     "--out", str(tmp_path / "summary.csv")])
    assert code == 0
    text = (tmp_path / "summary.csv").read_text()
    assert text.count("\n") == 3  # header + 2 rows
    assert "one" in text and "two" in text


def test_summarize_no_matches_exits_1(tmp_path):
    assert cli.main(["summarize", "--inputs", str(tmp_path / "*.json")]) == 1


def test_invariant_abort_exits_2(config_path, monkeypatch):
    def boom(*args, **kwargs):
        raise InvariantViolation("slot 3: drift bound exceeded")
    monkeypatch.setattr(cli, "run", boom)
    assert cli.main(["run", "--config", str(config_path)]) == 2


def test_missing_config_file_exits_1(tmp_path):
    assert cli.main(["validate", "--config", str(tmp_path / "nope.json")]) == 1


def test_out_dir_env_var(config_path, tmp_path, monkeypatch):
    monkeypatch.setenv("EDGEOFFLOAD_OUT", str(tmp_path / "envout"))
    code = cli.main(["run", "--config", str(config_path), "--name", "r"])
    assert code == 0
    assert (tmp_path / "envout" / "r.csv").exists()
