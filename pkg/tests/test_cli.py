import json

from typer.testing import CliRunner

from cesaro_lab.cli.main import app

runner = CliRunner()


def tiny(**overrides):
    data = {
        "name": "tiny",
        "kind": "partition",
        "seed": 7,
        "space": {"masses": [0.5, 0.5]},
        "family": {"kind": "constant", "value": 2.0},
        "window": {"horizon": 256},
        "oracle": {"samples": 0},
    }
    data.update(overrides)
    return data


def test_partition_passes(write_config, tmp_path):
    path = write_config(tiny())
    result = runner.invoke(app, ["partition", "--config", str(path), "--out", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output
    assert "All verdicts pass" in result.output
    assert (tmp_path / "out" / "report.md").exists()


def test_partition_verification_failure(write_config):
    path = write_config(tiny(expect={"finite_set": [1]}))
    result = runner.invoke(app, ["partition", "--config", str(path)])
    assert result.exit_code == 1
    assert "Verification failed" in result.output


def test_seed_override_reaches_the_report(write_config, tmp_path):
    path = write_config(tiny())
    result = runner.invoke(app, ["partition", "-c", str(path), "--seed", "99", "-o", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "out" / "report.json").read_text())["metadata"]["seed"] == 99


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        result = runner.invoke(app, ["partition", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == 2

    def test_unknown_key(self, write_config):
        result = runner.invoke(app, ["partition", "--config", str(write_config(tiny(colour="red")))])
        assert result.exit_code == 2
        assert "colour" in result.output

    def test_bad_eps_grid(self, write_config):
        result = runner.invoke(app, ["partition", "--config", str(write_config(tiny())), "--eps-grid", "0.5,x"])
        assert result.exit_code == 2

    def test_wrong_kind(self, write_config):
        result = runner.invoke(app, ["slln", "--config", str(write_config(tiny()))])
        assert result.exit_code == 2


class TestSuite:
    def test_empty_directory(self, tmp_path):
        result = runner.invoke(app, ["suite", str(tmp_path)])
        assert result.exit_code == 0
        assert "No configs found" in result.output

    def test_not_a_directory(self, tmp_path):
        result = runner.invoke(app, ["suite", str(tmp_path / "missing")])
        assert result.exit_code == 2

    def test_exit_code_follows_the_worst_entry(self, tmp_path):
        configs = tmp_path / "configs"
        configs.mkdir()
        (configs / "tiny.json").write_text(json.dumps(tiny()))
        (configs / "wrong.json").write_text(json.dumps(tiny(name="wrong", expect={"bounded_atoms": []})))
        result = runner.invoke(app, ["suite", str(configs), "--out", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "1/2 configs passed" in result.output
        assert json.loads((tmp_path / "out" / "suite.json").read_text())["exit_code"] == 1


def test_oracle_command(write_config):
    result = runner.invoke(app, ["oracle", "--config", str(write_config(tiny(oracle={"samples": 20})))])
    assert result.exit_code == 0, result.output
    assert "Oracle - tiny" in result.output


def test_oracle_rejects_slln_configs(write_config):
    path = write_config({"name": "s", "kind": "slln", "generator": {"kind": "iid", "length": 10}})
    result = runner.invoke(app, ["oracle", "--config", str(path)])
    assert result.exit_code == 2
