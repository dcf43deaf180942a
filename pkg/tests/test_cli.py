"""Command-line entry points: exit codes, help text, and subcommand output."""

import subprocess
import sys

import pytest

from autolr.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, cli_main
from conftest import TINY_CLASSIFICATION, TINY_REGRESSION, write_config


class TestUsageErrors:
    def test_no_arguments(self, capsys):
        assert cli_main([]) == EXIT_CONFIG
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_REGRESSION)
        code = cli_main(["run", "--config", str(config), "--turbo"])
        assert code == EXIT_CONFIG
        assert "--turbo" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert cli_main(["train"]) == EXIT_CONFIG

    def test_missing_config_names_path(self, tmp_path, capsys):
        code = cli_main(["run", "--config", str(tmp_path / "ghost.cfg")])
        assert code == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "config file not found" in err
        assert "ghost.cfg" in err

    def test_config_error_names_key(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_REGRESSION, epochs="zero")
        assert cli_main(["run", "--config", str(config)]) == EXIT_CONFIG
        assert "epochs must be an integer" in capsys.readouterr().err


class TestHelp:
    def test_top_level_help_shows_grammar(self, capsys):
        assert cli_main(["--help"]) == EXIT_OK
        out = capsys.readouterr().out
        for key in ("dataset.kind", "strategy", "hyper.eta_init", "batch_size"):
            assert key in out

    def test_run_help_shows_grammar(self, capsys):
        assert cli_main(["run", "--help"]) == EXIT_OK
        assert "hyper.eps_fd" in capsys.readouterr().out


class TestRun:
    def test_success_prints_metrics_path(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_CLASSIFICATION)
        assert cli_main(["run", "--config", str(config), "--quiet"]) == EXIT_OK
        out = capsys.readouterr().out.strip().splitlines()
        metrics = tmp_path / "runs" / "run.csv"
        assert out == [str(metrics)]
        assert metrics.is_file()

    def test_divergence_exits_3(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            TINY_REGRESSION,
            strategy="basic",
            hyper__eta_init="1e6",
            epochs="60",
        )
        assert cli_main(["run", "--config", str(config), "--quiet"]) == EXIT_DIVERGED
        assert "diverged" in capsys.readouterr().err


class TestCompare:
    def test_single_file_exits_2(self, tmp_path, capsys):
        assert cli_main(["compare", str(tmp_path / "only.csv")]) == EXIT_CONFIG
        assert "at least 2" in capsys.readouterr().err

    def test_two_runs_compare_clean(self, tmp_path, capsys):
        config_a = write_config(tmp_path / "a", TINY_REGRESSION, name="alpha")
        config_b = write_config(
            tmp_path / "b", TINY_REGRESSION, name="bravo", hyper__eta_init="0.05"
        )
        assert cli_main(["run", "--config", str(config_a), "--quiet"]) == EXIT_OK
        assert cli_main(["run", "--config", str(config_b), "--quiet"]) == EXIT_OK
        capsys.readouterr()
        code = cli_main(
            [
                "compare",
                str(tmp_path / "a" / "runs" / "alpha.csv"),
                str(tmp_path / "b" / "runs" / "bravo.csv"),
                "--out",
                str(tmp_path / "cmp"),
            ]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "series" in out and "alpha" in out and "bravo" in out
        assert out.count("chart:") == 4
        assert (tmp_path / "cmp" / "comparison.csv").is_file()

    def test_alignment_error_exits_2(self, tmp_path, capsys):
        config_a = write_config(tmp_path / "a", TINY_REGRESSION, name="alpha")
        config_b = write_config(tmp_path / "b", TINY_REGRESSION, name="bravo", epochs="5")
        cli_main(["run", "--config", str(config_a), "--quiet"])
        cli_main(["run", "--config", str(config_b), "--quiet"])
        code = cli_main(
            [
                "compare",
                str(tmp_path / "a" / "runs" / "alpha.csv"),
                str(tmp_path / "b" / "runs" / "bravo.csv"),
                "--out",
                str(tmp_path / "cmp"),
            ]
        )
        assert code == EXIT_CONFIG
        assert "cadence" in capsys.readouterr().err


class TestVerifyCommands:
    def test_gradcheck_reports_worst_error(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_CLASSIFICATION)
        assert cli_main(["gradcheck", "--config", str(config), "--trials", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "trial 1/2" in out
        assert "worst over 2 trial(s)" in out

    def test_gradcheck_rejects_zero_trials(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_CLASSIFICATION)
        code = cli_main(["gradcheck", "--config", str(config), "--trials", "0"])
        assert code == EXIT_CONFIG
        assert "--trials" in capsys.readouterr().err

    def test_linesearch_prints_minimizer(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_REGRESSION)
        code = cli_main(
            ["linesearch", "--config", str(config), "--lo", "0", "--hi", "0.1"]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "eta_star = " in out
        assert "f_star" in out

    def test_linesearch_bad_grid_exits_2(self, tmp_path, capsys):
        config = write_config(tmp_path, TINY_REGRESSION)
        code = cli_main(
            ["linesearch", "--config", str(config), "--lo", "1", "--hi", "0"]
        )
        assert code == EXIT_CONFIG


class TestInstalledEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "autolr.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "dataset.kind" in proc.stdout
