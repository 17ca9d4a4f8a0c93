"""Tests for the run_experiments command line."""
from __future__ import annotations

import json

import pytest

import run_experiments
from run_experiments import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VERIFY, cli_main
from src.onebit.experiments.acceptance import CriterionResult
from src.onebit.experiments.sweep_config import load_document

TINY = {
    "name": "tiny",
    "n": 32,
    "k": 2,
    "m_grid": [16, 32],
    "trials": 3,
    "tau": 0.01,
    "max_iters": 60,
    "master_seed": 5,
    "variants": [
        {"name": "biht", "algorithm": "biht"},
        {"name": "psw", "algorithm": "biht_psw", "sweep": "rho", "values": [0.5, 0.9]},
    ],
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY))
    return path


class TestUsage:
    def test_unknown_subcommand(self):
        assert cli_main(["train"]) == EXIT_USAGE

    def test_unknown_flag(self, tiny_config, tmp_path):
        assert cli_main(["sweep", "--config", str(tiny_config), "--out", str(tmp_path / "r.csv"), "--fast"]) == EXIT_USAGE

    def test_missing_subcommand(self):
        assert cli_main([]) == EXIT_USAGE

    def test_bad_worker_count(self, tiny_config, tmp_path):
        argv = ["sweep", "--config", str(tiny_config), "--out", str(tmp_path / "r.csv"), "--workers", "0"]
        assert cli_main(argv) == EXIT_USAGE

    def test_help(self, capsys):
        assert cli_main(["--help"]) == EXIT_OK
        assert "recover" in capsys.readouterr().out


class TestSweepCommand:
    def test_rerun_identical(self, tiny_config, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli_main(["--quiet", "sweep", "--config", str(tiny_config), "--out", str(first)]) == EXIT_OK
        assert cli_main(["--quiet", "sweep", "--config", str(tiny_config), "--out", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_text().splitlines()) == 1 + 2 * 3

    def test_all_outputs(self, tiny_config, tmp_path, capsys):
        argv = [
            "sweep", "--config", str(tiny_config),
            "--out", str(tmp_path / "r.csv"),
            "--plot", str(tmp_path / "r.svg"),
            "--trials-out", str(tmp_path / "t.csv"),
            "--provenance-out", str(tmp_path / "p.yaml"),
            "--seed", "9", "--trials", "2",
        ]
        assert cli_main(argv) == EXIT_OK
        assert (tmp_path / "r.svg").read_text().lstrip().startswith("<?xml")
        assert len((tmp_path / "t.csv").read_text().splitlines()) == 1 + 2 * 3 * 2
        provenance = load_document(tmp_path / "p.yaml")
        assert provenance["master_seed"] == 9
        assert provenance["config"]["trials"] == 2
        out = capsys.readouterr().out
        assert "=== Running sweep tiny ===" in out
        assert "Sweep complete: 6 rows, 12 trials" in out

    def test_seed_changes_output(self, tiny_config, tmp_path):
        cli_main(["--quiet", "sweep", "--config", str(tiny_config), "--out", str(tmp_path / "a.csv")])
        cli_main(["--quiet", "sweep", "--config", str(tiny_config), "--out", str(tmp_path / "b.csv"), "--seed", "6"])
        assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()

    def test_missing_config(self, tmp_path, capsys):
        argv = ["sweep", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "r.csv")]
        assert cli_main(argv) == EXIT_RUNTIME
        assert "missing.json" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**TINY, "m_grid": [32, 16]}))
        assert cli_main(["sweep", "--config", str(path), "--out", str(tmp_path / "r.csv")]) == EXIT_RUNTIME


    @pytest.mark.parametrize(
        "changes",
        [{"tau": "fast"}, {"master_seed": "seven"}, {"variants": [{"algorithm": "biht_psw", "rho": "high"}]}],
    )
    def test_wrong_type_is_runtime_error(self, tmp_path, capsys, changes):
        path = tmp_path / "typed.json"
        path.write_text(json.dumps({**TINY, **changes}))
        assert cli_main(["sweep", "--config", str(path), "--out", str(tmp_path / "r.csv")]) == EXIT_RUNTIME
        assert "typed.json" in capsys.readouterr().err

class TestRecoverCommand:
    def test_prints_metrics_per_setting(self, tiny_config, capsys):
        assert cli_main(["recover", "--config", str(tiny_config), "--m", "32", "--trial", "1"]) == EXIT_OK
        lines = [line for line in capsys.readouterr().out.splitlines() if "mse=" in line]
        assert len(lines) == 3
        assert lines[0].startswith("biht:")
        assert lines[1].startswith("psw rho=0.5:")

    def test_m_outside_grid(self, tiny_config):
        assert cli_main(["--quiet", "recover", "--config", str(tiny_config), "--m", "20"]) == EXIT_OK


class TestFiguresCommand:
    def test_writes_csv_and_svg(self, tmp_path, monkeypatch):
        from dataclasses import replace

        real_load = run_experiments.load_figure

        def shrunk(name):
            return replace(real_load(name), m_grid=(50, 100), max_iters=100)

        monkeypatch.setattr(run_experiments, "load_figure", shrunk)
        argv = ["--quiet", "figures", "--name", "fig1", "--trials", "2", "--seed", "7", "--out-dir", str(tmp_path)]
        assert cli_main(argv) == EXIT_OK
        assert (tmp_path / "fig1.csv").exists()
        assert (tmp_path / "fig1.svg").exists()
        assert len((tmp_path / "fig1.csv").read_text().splitlines()) == 1 + 2 * 3

    def test_unknown_figure(self):
        assert cli_main(["figures", "--name", "fig9"]) == EXIT_USAGE


class TestVerifyCommand:
    def _patch(self, monkeypatch, passed):
        seen = {}

        def fake(settings, on_result=None):
            seen["settings"] = settings
            outcome = CriterionResult("1", "stub", passed, "")
            if on_result is not None:
                on_result(outcome)
            return [outcome]

        monkeypatch.setattr(run_experiments, "run_acceptance", fake)
        return seen

    def test_pass(self, monkeypatch, capsys):
        seen = self._patch(monkeypatch, True)
        assert cli_main(["verify", "--quick"]) == EXIT_OK
        assert seen["settings"].trials == 20
        assert "[PASS] 1" in capsys.readouterr().out

    def test_fail(self, monkeypatch, capsys):
        self._patch(monkeypatch, False)
        assert cli_main(["verify"]) == EXIT_VERIFY
        assert "[FAIL] 1" in capsys.readouterr().out
