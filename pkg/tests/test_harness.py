"""Experiment runner: the metrics CSV contract, determinism, and run comparison."""

import csv
from pathlib import Path

import pytest

from autolr import charts
from autolr.config import parse_config
from autolr.errors import AlignmentError, ConfigError, DivergenceError, SchemaError
from autolr.harness import CSV_COLUMNS, SUMMARY_ITER, compare_runs, run_experiment
from conftest import TINY_CLASSIFICATION, TINY_REGRESSION, read_metrics, write_config

CLASSIFICATION_BASE = TINY_CLASSIFICATION
REGRESSION_BASE = TINY_REGRESSION


def make_config(tmp_path: Path, base: dict, name: str = "run", **overrides):
    return parse_config(write_config(tmp_path, base, name, **overrides))


def write_metrics_text(path: Path, run_id: str, rows: list[tuple]) -> Path:
    """Hand-build a metrics CSV: rows are (epoch, iter, eta, train_loss)."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for epoch, iteration, eta, loss in rows:
            writer.writerow(
                [run_id, epoch, iteration, repr(eta), repr(loss), "", "", "", "0", "0"]
            )
    return path


class TestRunExperiment:
    def test_full_batch_logs_every_iteration(self, tmp_path):
        config = make_config(tmp_path, CLASSIFICATION_BASE)
        out = run_experiment(config, verbose=False)
        assert out == config.output_dir / "run.csv"
        header, rows = read_metrics(out)
        assert header == list(CSV_COLUMNS)
        assert [(r["epoch"], r["iter"]) for r in rows[:-1]] == [
            ("1", "1"), ("2", "2"), ("3", "3")
        ]
        assert rows[-1]["iter"] == str(SUMMARY_ITER)

    def test_float_cells_round_trip_exactly(self, tmp_path):
        config = make_config(tmp_path, CLASSIFICATION_BASE)
        _, rows = read_metrics(run_experiment(config, verbose=False))
        for row in rows:
            for column in ("eta", "train_loss", "test_loss", "train_acc", "test_acc"):
                assert row[column] != ""
                assert repr(float(row[column])) == row[column]

    def test_regression_leaves_accuracy_blank(self, tmp_path):
        config = make_config(tmp_path, REGRESSION_BASE)
        _, rows = read_metrics(run_experiment(config, verbose=False))
        for row in rows:
            assert row["train_acc"] == ""
            assert row["test_acc"] == ""
            assert row["test_loss"] != ""

    def test_no_test_split_leaves_test_columns_blank(self, tmp_path):
        config = make_config(
            tmp_path, REGRESSION_BASE, split__train="32", split__test=None
        )
        _, rows = read_metrics(run_experiment(config, verbose=False))
        for row in rows:
            assert row["test_loss"] == ""
            assert row["test_acc"] == ""

    def test_pinned_clock_makes_runs_bitwise_identical(self, tmp_path):
        config_a = make_config(tmp_path / "a", CLASSIFICATION_BASE)
        config_b = make_config(tmp_path / "b", CLASSIFICATION_BASE)
        out_a = run_experiment(config_a, verbose=False, clock=lambda: 0.0)
        out_b = run_experiment(config_b, verbose=False, clock=lambda: 0.0)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_real_clock_only_touches_wall_ms(self, tmp_path):
        config_a = make_config(tmp_path / "a", CLASSIFICATION_BASE)
        config_b = make_config(tmp_path / "b", CLASSIFICATION_BASE)
        _, rows_a = read_metrics(run_experiment(config_a, verbose=False))
        _, rows_b = read_metrics(run_experiment(config_b, verbose=False))
        stripped_a = [{k: v for k, v in row.items() if k != "wall_ms"} for row in rows_a]
        stripped_b = [{k: v for k, v in row.items() if k != "wall_ms"} for row in rows_b]
        assert stripped_a == stripped_b

    def test_minibatch_cadence_log_every_plus_epoch_end(self, tmp_path):
        config = make_config(
            tmp_path, CLASSIFICATION_BASE, batch_size="4", log_every="4", epochs="2"
        )
        _, rows = read_metrics(run_experiment(config, verbose=False))
        cadence = [(r["epoch"], r["iter"]) for r in rows[:-1]]
        assert cadence == [("1", "4"), ("1", "6"), ("2", "8"), ("2", "12")]

    def test_divergence_leaves_partial_csv_without_summary(self, tmp_path):
        config = make_config(
            tmp_path,
            REGRESSION_BASE,
            strategy="basic",
            hyper__eta_init="1e6",
            epochs="60",
        )
        with pytest.raises(DivergenceError):
            run_experiment(config, verbose=False)
        out = config.output_dir / "run.csv"
        header, rows = read_metrics(out)
        assert header == list(CSV_COLUMNS)
        assert 1 <= len(rows) < 60
        assert all(row["iter"] != str(SUMMARY_ITER) for row in rows)

    def test_summary_row_reports_best_test_accuracy(self, tmp_path):
        config = make_config(tmp_path, CLASSIFICATION_BASE, epochs="8")
        _, rows = read_metrics(run_experiment(config, verbose=False))
        summary, metric_rows = rows[-1], rows[:-1]
        best = max(metric_rows, key=lambda r: float(r["test_acc"]))
        assert summary["iter"] == str(SUMMARY_ITER)
        assert summary["test_acc"] == best["test_acc"]
        assert summary["epoch"] == best["epoch"]

    def test_summary_row_reports_best_test_loss_for_regression(self, tmp_path):
        config = make_config(tmp_path, REGRESSION_BASE, epochs="8")
        _, rows = read_metrics(run_experiment(config, verbose=False))
        summary, metric_rows = rows[-1], rows[:-1]
        best = min(metric_rows, key=lambda r: float(r["test_loss"]))
        assert summary["test_loss"] == best["test_loss"]
        assert summary["epoch"] == best["epoch"]
        assert summary["eta"] == metric_rows[-1]["eta"]

    def test_probe_accounting_and_eta_floor(self, tmp_path):
        config = make_config(tmp_path, CLASSIFICATION_BASE, epochs="6")
        _, rows = read_metrics(run_experiment(config, verbose=False))
        for row in rows[:-1]:
            assert int(row["probe_evals_cumulative"]) == 5 * int(row["iter"])
            assert float(row["eta"]) >= config.hyper.delta_smooth
        assert int(rows[-1]["probe_evals_cumulative"]) == 5 * len(rows[:-1])

    def test_minibatch_probe_totals_count_unlogged_iterations(self, tmp_path):
        config = make_config(
            tmp_path, CLASSIFICATION_BASE, batch_size="4", log_every="4", epochs="2"
        )
        _, rows = read_metrics(run_experiment(config, verbose=False))
        for row in rows[:-1]:
            assert int(row["probe_evals_cumulative"]) == 5 * int(row["iter"])

    def test_valprobe_strategy_runs(self, tmp_path):
        config = make_config(
            tmp_path,
            CLASSIFICATION_BASE,
            strategy="second_order_valprobe",
            split__train="20",
            split__test="6",
            split__val="6",
        )
        _, rows = read_metrics(run_experiment(config, verbose=False))
        assert len(rows) == 4
        assert int(rows[-2]["probe_evals_cumulative"]) == 15

    def test_layer_size_mismatch_names_both_ends(self, tmp_path):
        config = make_config(
            tmp_path, CLASSIFICATION_BASE, model__kind="mlp", model__layer_sizes="4,8,3"
        )
        with pytest.raises(ConfigError, match="must start at 3 features and end at 3 classes"):
            run_experiment(config, verbose=False)

    def test_verbose_progress_lines(self, tmp_path, capsys):
        config = make_config(tmp_path, CLASSIFICATION_BASE)
        run_experiment(config, verbose=True)
        out = capsys.readouterr().out
        assert "[run] epoch 1/3" in out
        assert "best test acc" in out


class TestCompareRuns:
    def run_pair(self, tmp_path, base, **overrides):
        config_a = make_config(tmp_path / "a", base, name="alpha", **overrides)
        config_b = make_config(
            tmp_path / "b", base, name="bravo", hyper__eta_init="0.05", **overrides
        )
        return (
            run_experiment(config_a, verbose=False),
            run_experiment(config_b, verbose=False),
        )

    def test_needs_at_least_two_files(self, tmp_path):
        with pytest.raises(AlignmentError, match="need at least 2"):
            compare_runs([tmp_path / "only.csv"], tmp_path)

    def test_cadence_mismatch_names_offending_file(self, tmp_path):
        path_a = run_experiment(make_config(tmp_path / "a", REGRESSION_BASE), verbose=False)
        path_b = run_experiment(
            make_config(tmp_path / "b", REGRESSION_BASE, epochs="5"), verbose=False
        )
        with pytest.raises(AlignmentError, match="logging cadence differs"):
            compare_runs([path_a, path_b], tmp_path / "cmp")

    def test_regression_pair_emits_four_charts(self, tmp_path):
        paths = self.run_pair(tmp_path, REGRESSION_BASE)
        result = compare_runs(paths, tmp_path / "cmp")
        names = sorted(p.name for p in result.charts)
        assert names == [
            "chart_eta.svg",
            "chart_probe_evals_cumulative.svg",
            "chart_test_loss.svg",
            "chart_train_loss.svg",
        ]
        assert result.long_csv.is_file()
        assert "alpha" in result.table and "bravo" in result.table

    def test_classification_pair_emits_six_charts(self, tmp_path):
        paths = self.run_pair(tmp_path, CLASSIFICATION_BASE)
        result = compare_runs(paths, tmp_path / "cmp")
        assert len(result.charts) == 6

    def test_long_csv_preserves_source_cells(self, tmp_path):
        paths = self.run_pair(tmp_path, REGRESSION_BASE)
        _, source_rows = read_metrics(paths[0])
        source_etas = [r["eta"] for r in source_rows if r["iter"] != str(SUMMARY_ITER)]
        result = compare_runs(paths, tmp_path / "cmp")
        with result.long_csv.open(newline="") as fh:
            long_rows = list(csv.DictReader(fh))
        alpha_etas = [
            r["value"] for r in long_rows if r["series"] == "alpha" and r["metric"] == "eta"
        ]
        assert alpha_etas == source_etas

    def test_duplicate_run_ids_get_numbered(self, tmp_path):
        path = run_experiment(make_config(tmp_path, REGRESSION_BASE), verbose=False)
        result = compare_runs([path, path], tmp_path / "cmp")
        assert "run#2" in result.table

    def test_wide_loss_range_switches_to_log_axis(self, tmp_path):
        rows_a = [(1, 1, 0.1, 4000.0), (1, 2, 0.1, 40.0), (1, 3, 0.1, 1.0)]
        rows_b = [(1, 1, 0.1, 5000.0), (1, 2, 0.1, 50.0), (1, 3, 0.1, 2.0)]
        path_a = write_metrics_text(tmp_path / "a.csv", "a", rows_a)
        path_b = write_metrics_text(tmp_path / "b.csv", "b", rows_b)
        result = compare_runs([path_a, path_b], tmp_path / "cmp")
        chart = {p.name: p for p in result.charts}["chart_train_loss.svg"]
        assert ">log10(train_loss)<" in chart.read_text()
        eta_chart = {p.name: p for p in result.charts}["chart_eta.svg"]
        assert ">log10(" not in eta_chart.read_text()

    def test_summary_rows_excluded_from_alignment(self, tmp_path):
        paths = self.run_pair(tmp_path, REGRESSION_BASE)
        result = compare_runs(paths, tmp_path / "cmp")
        with result.long_csv.open(newline="") as fh:
            long_rows = list(csv.DictReader(fh))
        assert all(r["x"] != str(SUMMARY_ITER) for r in long_rows)

    def test_wrong_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("run_id,loss\nx,1.0\n")
        good = write_metrics_text(tmp_path / "good.csv", "g", [(1, 1, 0.1, 1.0)])
        with pytest.raises(SchemaError, match="has header"):
            compare_runs([good, bad], tmp_path / "cmp")

    def test_summary_only_file_rejected(self, tmp_path):
        empty = write_metrics_text(
            tmp_path / "empty.csv", "e", [(1, SUMMARY_ITER, 0.1, 1.0)]
        )
        good = write_metrics_text(tmp_path / "good.csv", "g", [(1, 1, 0.1, 1.0)])
        with pytest.raises(SchemaError, match="no metric rows"):
            compare_runs([good, empty], tmp_path / "cmp")


class TestCharts:
    def test_identical_inputs_identical_bytes(self, tmp_path):
        series = {"a": [(0.0, 1.0), (1.0, 2.0)], "b": [(0.0, 2.0), (1.0, 1.0)]}
        path_1 = charts.line_chart(series, "demo", tmp_path / "one.svg")
        path_2 = charts.line_chart(series, "demo", tmp_path / "two.svg")
        assert path_1.read_bytes() == path_2.read_bytes()

    def test_one_polyline_per_series_with_legend(self, tmp_path):
        series = {"slow": [(0.0, 1.0), (1.0, 2.0)], "fast": [(0.0, 2.0), (1.0, 4.0)]}
        text = charts.line_chart(series, "eta", tmp_path / "chart.svg").read_text()
        assert text.count("<polyline") == 2
        assert ">slow<" in text and ">fast<" in text
        assert ">eta<" in text

    def test_constant_series_renders(self, tmp_path):
        text = charts.line_chart(
            {"flat": [(0.0, 3.0), (1.0, 3.0)]}, "flat", tmp_path / "flat.svg"
        ).read_text()
        assert "<polyline" in text

    def test_empty_series_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="at least one point"):
            charts.line_chart({"nothing": []}, "x", tmp_path / "nothing.svg")
