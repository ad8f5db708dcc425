"""
Tests for run configuration and the command line
"""

import csv
import json

import numpy as np
import pytest
from pydantic import ValidationError

from crystalwalk.core.config import settings
from crystalwalk.core.errors import ConfigError
from crystalwalk.main import run_cli
from crystalwalk.models.lattice import LatticeKind, VertexClass
from crystalwalk.schemas.config import RunConfig
from crystalwalk.utils.export import TRAJECTORY_COLUMNS


def _write_config(tmp_path, **values):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(values))
    return str(path)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.lattice is LatticeKind.ICE
        assert config.p == 0.2
        assert config.replicates == 100_000

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as exc:
            RunConfig.model_validate({"lattice": "ice", "bogus": 1})
        assert exc.value.errors()[0]["loc"] == ("bogus",)

    def test_alpha_bounds(self):
        with pytest.raises(ValidationError):
            RunConfig(alpha=1.0)

    def test_row_shape(self):
        with pytest.raises(ValidationError):
            RunConfig(lattice="graphite", horizontal=[[0.4, 0.2, 0.2], [0.4, 0.2, 0.2]])

    def test_to_table_from_rows(self):
        config = RunConfig(p=0.1, horizontal=[[0.5, 0.2, 0.2], [0.3, 0.3, 0.3]], a=2.0)
        table = config.to_table()
        assert table.geometry.a == 2.0
        assert table.row(VertexClass(i=0)) == (0.5, 0.2, 0.2)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.load(str(tmp_path / "absent.json"))

    def test_load_bad_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.load(str(path))


class TestAsymptoticsCommand:
    def test_symmetric_ice(self, capsys):
        assert run_cli(["asymptotics", "--lattice", "ice"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert np.allclose(payload["Gamma"], np.diag([0.4, 0.4, 0.2]))
        assert payload["m"] is None

    def test_graphite_to_file(self, tmp_path, capsys):
        out = tmp_path / "summary.json"
        assert run_cli(["asymptotics", "--lattice", "graphite", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert np.allclose(payload["Gamma"], np.diag([4 / 9, 4 / 9, 1 / 9]))
        assert len(payload["Lambda"]) == 5

    def test_row_sum_error_exit_code(self, tmp_path, capsys):
        config = _write_config(tmp_path, lattice="ice", p=0.2, horizontal=[[0.5, 0.2, 0.2], [0.3, 0.3, 0.2]])
        assert run_cli(["asymptotics", "--config", config]) == 2
        err = capsys.readouterr().err
        assert "row 0" in err
        assert "residual" in err

    def test_invalid_key_exit_code(self, tmp_path, capsys):
        config = _write_config(tmp_path, lattice="ice", alpha=1.5)
        assert run_cli(["asymptotics", "--config", config]) == 2
        assert "alpha" in capsys.readouterr().err

    def test_lattice_flag_contradicts_config(self, tmp_path, capsys):
        config = _write_config(tmp_path, lattice="graphite")
        assert run_cli(["asymptotics", "--config", config, "--lattice", "ice"]) == 2


class TestSimulateCommand:
    def test_summary_to_stdout(self, capsys):
        assert run_cli(["simulate", "--lattice", "graphite", "--steps", "200", "--seed", "7"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["steps"] == 200
        assert payload["seed"] == 7
        assert len(payload["counters"]) == 3
        assert "bracket_N^J" in payload["ledger"]

    def test_same_seed_same_output(self, capsys):
        run_cli(["simulate", "--steps", "300", "--seed", "11"])
        first = json.loads(capsys.readouterr().out)
        run_cli(["simulate", "--steps", "300", "--seed", "11"])
        second = json.loads(capsys.readouterr().out)
        assert first == second

    def test_seed_from_environment(self, capsys, monkeypatch):
        monkeypatch.setattr(settings, "CRYSTALWALK_SEED", 99)
        run_cli(["simulate", "--steps", "10"])
        assert json.loads(capsys.readouterr().out)["seed"] == 99

    def test_trajectory_csv(self, tmp_path, capsys):
        path = tmp_path / "path.csv"
        summary = tmp_path / "walk.json"
        args = ["simulate", "--steps", "50", "--seed", "3", "--trajectory", str(path), "--summary", str(summary)]
        assert run_cli(args) == 0
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        assert tuple(rows[0]) == TRAJECTORY_COLUMNS
        assert len(rows) == 52
        assert rows[1][1:4] == ["0.0", "0.0", "0.0"]
        assert rows[1][5] == ""
        assert json.loads(summary.read_text())["steps"] == 50


class TestVerifyCommand:
    def test_oracles_pass(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert run_cli(["verify", "oracles", "--lattice", "graphite", "--out", str(out)]) == 0
        document = json.loads(out.read_text())
        assert document["metadata"]["lattice"] == "graphite"
        checks = [r["check"] for r in document["reports"]]
        assert checks == sorted(checks)
        assert all(r["status"] != "fail" for r in document["reports"])

    def test_ledger_suite(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        args = ["verify", "ledger", "--steps", "500", "--ledger-paths", "3", "--seed", "5", "--out", str(out)]
        assert run_cli(args) == 0
        reports = json.loads(out.read_text())["reports"]
        assert all(r["replicates"] == 3 for r in reports)

    def test_small_clt_suite(self, capsys):
        args = ["verify", "clt", "--steps", "100", "--replicates", "2000", "--seed", "1", "--threads", "2"]
        assert run_cli(args) == 0

    def test_bad_tolerance(self, capsys):
        assert run_cli(["verify", "oracles", "--tol", "unknown=1"]) == 2


class TestSelftestCommand:
    def test_reference_cases(self, tmp_path, capsys):
        out = tmp_path / "selftest.json"
        assert run_cli(["selftest", "--fuzz-tables", "20", "--out", str(out)]) == 0
        checks = {r["check"] for r in json.loads(out.read_text())["reports"]}
        assert "selftest.zigzag.orbit" in checks
        assert "selftest.p0_twin.gamma" in checks
        assert "selftest.fuzz[graphite]" in checks
