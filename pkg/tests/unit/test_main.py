"""
Unit tests for the rankstat command line.
"""

import argparse
import csv
import io
import json

import pytest

from src.rankstat_mpc import __version__
from src.rankstat_mpc.main import build_config, main


@pytest.mark.unit
class TestCommandLine:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_plaintext_run(self, capsys, fixtures_dir):
        code = main(["-q", "run", "--scenario", str(fixtures_dir / "scenario_example.txt"), "--plaintext"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["result"] == 3
        assert report["z_history"] == [-3, 1]
        assert report["guesses"] == [4.5, 2.5]

    def test_flags_override_scenario(self, capsys, fixtures_dir):
        code = main(
            [
                "-q", "run",
                "--scenario", str(fixtures_dir / "scenario_example.txt"),
                "--values", "10,20,30,40,50",
                "--range", "0:64",
                "--plaintext",
            ]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["true_value"] == 30
        assert abs(report["result"] - 30) <= 1

    def test_accuracy_csv(self, capsys):
        code = main(
            [
                "-q", "accuracy",
                "--users", "101",
                "--trials", "3",
                "--percentiles", "50",
                "--sigmas", "5,10",
                "--out", "csv",
            ]
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [row["sigma"] for row in rows] == ["5.0", "10.0"]
        assert all(float(row["mae"]) <= 1 for row in rows)

    def test_invalid_scenario_returns_two(self, capsys):
        assert main(["-q", "run", "--range", "8:0", "--plaintext"]) == 2

    def test_missing_scenario_file(self, tmp_path):
        assert main(["-q", "run", "--scenario", str(tmp_path / "absent.txt"), "--plaintext"]) == 2

    def test_malformed_range(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", "--range", "eight"])
        assert excinfo.value.code == 2


@pytest.mark.unit
def test_scenario2_flag(fixtures_dir):
    args = argparse.Namespace(
        scenario=None, users=None, workers=None, bits=None, protocol=None,
        percentile=None, k=None, delta=None, data=None, mu=None, sigma=None,
        seed=None, trials=None, eta=None, value_range=(0, 8), opt=[],
        values=None, scenario2=str(fixtures_dir / "scenario2_example.txt"),
    )
    cfg = build_config(args)
    assert cfg.data == "scenario2"
    assert cfg.users == 3
    assert cfg.population == 5
