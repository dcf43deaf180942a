"""Experiment runner and run comparison.

`run_experiment` turns a validated config into a metrics CSV; `compare_runs`
aligns several of those CSVs into a long-format table plus line charts.
Everything a run writes is a pure function of (config, run_seed), except the
wall_ms column which is informational only.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from . import charts
from .config import (
    CsvDatasetSpec,
    ExperimentConfig,
    IdxDatasetSpec,
    SyntheticClassificationSpec,
    SyntheticRegressionSpec,
)
from .data import BatchIterator, Dataset, load_csv, load_idx, split, standardize, \
    synthesize_classification, synthesize_regression
from .errors import AlignmentError, ConfigError, DivergedProbeError, DivergenceError, SchemaError
from .models import build_linreg, build_logreg, build_mlp
from .objective import Batch, Objective
from .optim import OptimizerState, init_state, make_step_fn

CSV_COLUMNS = (
    "run_id",
    "epoch",
    "iter",
    "eta",
    "train_loss",
    "test_loss",
    "train_acc",
    "test_acc",
    "probe_evals_cumulative",
    "wall_ms",
)

SUMMARY_ITER = -1

_CHART_METRICS = ("eta", "train_loss", "test_loss", "train_acc", "test_acc", "probe_evals_cumulative")


@dataclass(frozen=True)
class MetricsRow:
    run_id: str
    epoch: int
    iteration: int
    eta: float
    train_loss: float
    test_loss: float | None
    train_acc: float | None
    test_acc: float | None
    probe_evals_cumulative: int
    wall_ms: int

    def to_cells(self) -> list[str]:
        def fmt(value: float | None) -> str:
            return "" if value is None else repr(float(value))

        return [
            self.run_id,
            str(self.epoch),
            str(self.iteration),
            fmt(self.eta),
            fmt(self.train_loss),
            fmt(self.test_loss),
            fmt(self.train_acc),
            fmt(self.test_acc),
            str(self.probe_evals_cumulative),
            str(self.wall_ms),
        ]


@dataclass(frozen=True)
class PreparedExperiment:
    """Everything a run needs, materialized from a config."""

    train: Dataset
    test: Dataset
    val: Dataset
    objective: Objective


@dataclass(frozen=True)
class ComparisonResult:
    long_csv: Path
    charts: tuple[Path, ...]
    table: str


def load_dataset(config: ExperimentConfig) -> Dataset:
    spec = config.dataset
    if isinstance(spec, CsvDatasetSpec):
        return load_csv(spec.path, spec.target_column, has_header=spec.has_header)
    if isinstance(spec, IdxDatasetSpec):
        return load_idx(spec.images_path, spec.labels_path)
    if isinstance(spec, SyntheticRegressionSpec):
        dataset, _ = synthesize_regression(spec.n, spec.dim, spec.noise_std, spec.seed)
        return dataset
    if isinstance(spec, SyntheticClassificationSpec):
        return synthesize_classification(
            spec.n, spec.dim, spec.classes, spec.separation, spec.seed
        )
    raise ConfigError(f"unhandled dataset spec {type(spec).__name__}")


def build_objective(config: ExperimentConfig, dataset: Dataset) -> Objective:
    d = dataset.input_dim
    if config.model_kind == "linreg":
        return build_linreg(d)
    classes = dataset.class_count or 0
    if classes < 2:
        raise ConfigError(f"dataset {dataset.name!r} has {classes} classes; need at least 2")
    if config.model_kind == "logreg":
        return build_logreg(d, classes)
    sizes = config.layer_sizes or ()
    if sizes[0] != d or sizes[-1] != classes:
        raise ConfigError(
            f"model.layer_sizes {list(sizes)} must start at {d} features "
            f"and end at {classes} classes"
        )
    return build_mlp(sizes, seed=config.run_seed)


def prepare_experiment(config: ExperimentConfig) -> PreparedExperiment:
    dataset = load_dataset(config)
    train, test, val = split(dataset, config.split)
    if config.normalize:
        train, test, val = standardize(train, test, val)
    objective = build_objective(config, train)
    return PreparedExperiment(train=train, test=test, val=val, objective=objective)


def _accuracy(objective: Objective, w: np.ndarray, batch: Batch) -> float:
    predicted = np.argmax(objective.logits(w, batch.features), axis=1)
    return float(np.mean(predicted == batch.targets))


def _endless_batches(iterator: BatchIterator) -> Iterator[Batch]:
    epoch = 1
    while True:
        yield from iterator.epoch(epoch)
        epoch += 1


def _write_metrics(path: Path, rows: Sequence[MetricsRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.to_cells())


def _pick_best(rows: Sequence[MetricsRow], classification: bool) -> MetricsRow:
    if classification:
        if rows[0].test_acc is not None:
            return max(rows, key=lambda r: r.test_acc)
        return max(rows, key=lambda r: r.train_acc)
    if rows[0].test_loss is not None:
        return min(rows, key=lambda r: r.test_loss)
    return min(rows, key=lambda r: r.train_loss)


def run_experiment(
    config: ExperimentConfig,
    verbose: bool = True,
    clock: Callable[[], float] = time.perf_counter,
) -> Path:
    """Run one training experiment and write its metrics CSV.

    Returns the CSV path.  On divergence the partial CSV (rows logged so
    far) is still written before the error propagates, so a halted run
    leaves evidence behind.
    """
    prepared = prepare_experiment(config)
    train, test, val = prepared.train, prepared.test, prepared.val
    objective = prepared.objective
    classification = train.class_count is not None

    batch_size = config.batch_size or train.size
    full_batch = batch_size >= train.size
    train_iter = BatchIterator(train, batch_size, config.run_seed, stream=0)
    val_stream: Iterator[Batch] | None = None
    if config.strategy == "second_order_valprobe":
        val_stream = _endless_batches(
            BatchIterator(val, min(batch_size, val.size), config.run_seed, stream=1)
        )

    train_eval = train.to_batch()
    test_eval = test.to_batch() if test.size else None

    state = init_state(objective.initial_params, config.hyper)
    step = make_step_fn(config.strategy, config.first_order_backend)
    out_path = config.output_dir / f"{config.run_id}.csv"

    rows: list[MetricsRow] = []
    probes_total = 0
    iteration = 0
    started = clock()

    def capture(epoch: int) -> MetricsRow:
        train_loss = objective.loss(state.w, train_eval)
        test_loss = objective.loss(state.w, test_eval) if test_eval is not None else None
        train_acc = _accuracy(objective, state.w, train_eval) if classification else None
        test_acc = (
            _accuracy(objective, state.w, test_eval)
            if classification and test_eval is not None
            else None
        )
        if not math.isfinite(train_loss):
            raise DivergenceError(
                f"train loss became non-finite at epoch {epoch}, iteration {iteration}"
            )
        return MetricsRow(
            run_id=config.run_id,
            epoch=epoch,
            iteration=iteration,
            eta=state.eta,
            train_loss=train_loss,
            test_loss=test_loss,
            train_acc=train_acc,
            test_acc=test_acc,
            probe_evals_cumulative=probes_total,
            wall_ms=int(round((clock() - started) * 1000.0)),
        )

    batches_per_epoch = train_iter.batches_per_epoch
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            for epoch in range(1, config.epochs + 1):
                for k, batch in enumerate(train_iter.epoch(epoch), start=1):
                    iteration += 1
                    val_batch = next(val_stream) if val_stream is not None else None
                    report = step(state, objective, batch, val_batch=val_batch)
                    probes_total += report.probe_count
                    if full_batch or iteration % config.log_every == 0 or k == batches_per_epoch:
                        rows.append(capture(epoch))
                if verbose and rows:
                    last = rows[-1]
                    mean_loss = last.train_loss / train.size
                    line = (
                        f"[{config.run_id}] epoch {epoch}/{config.epochs} "
                        f"iter {last.iteration} eta {last.eta:.6g} "
                        f"train {last.train_loss:.6g} (mean {mean_loss:.6g})"
                    )
                    if last.test_loss is not None:
                        line += f" test {last.test_loss:.6g}"
                    if last.test_acc is not None:
                        line += f" acc {last.test_acc:.4f}"
                    print(line)
    except (DivergenceError, DivergedProbeError):
        _write_metrics(out_path, rows)
        if verbose:
            print(f"[{config.run_id}] diverged; partial metrics in {out_path}")
        raise

    best = _pick_best(rows, classification)
    elapsed_ms = int(round((clock() - started) * 1000.0))
    rows.append(
        MetricsRow(
            run_id=config.run_id,
            epoch=best.epoch,
            iteration=SUMMARY_ITER,
            eta=state.eta,
            train_loss=best.train_loss,
            test_loss=best.test_loss,
            train_acc=best.train_acc,
            test_acc=best.test_acc,
            probe_evals_cumulative=probes_total,
            wall_ms=elapsed_ms,
        )
    )
    _write_metrics(out_path, rows)
    if verbose:
        if classification and best.test_acc is not None:
            print(
                f"[{config.run_id}] done: best test acc {best.test_acc:.4f} "
                f"at epoch {best.epoch}; metrics in {out_path}"
            )
        else:
            print(f"[{config.run_id}] done: metrics in {out_path}")
    return out_path


def _read_metrics(path: Path) -> tuple[str, list[dict[str, str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        if tuple(header) != CSV_COLUMNS:
            raise SchemaError(f"{path} has header {header}, expected {list(CSV_COLUMNS)}")
        rows = [dict(zip(CSV_COLUMNS, row)) for row in reader]
    rows = [row for row in rows if row["iter"] != str(SUMMARY_ITER)]
    if not rows:
        raise SchemaError(f"{path} has no metric rows")
    return rows[0]["run_id"], rows


def _metric_series(rows: list[dict[str, str]], metric: str) -> list[float] | None:
    values = [row[metric] for row in rows]
    if any(cell == "" for cell in values):
        return None
    return [float(cell) for cell in values]


def compare_runs(paths: Sequence[str | Path], out_dir: str | Path) -> ComparisonResult:
    """Align several metrics CSVs, emit long-format data plus one chart per metric.

    All inputs must share the exact (epoch, iter) logging sequence; a chart
    is produced for each metric that every input reports.
    """
    if len(paths) < 2:
        raise AlignmentError(f"need at least 2 metrics files to compare, got {len(paths)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    loaded: list[tuple[str, Path, list[dict[str, str]]]] = []
    seen_names: set[str] = set()
    for path in paths:
        path = Path(path)
        run_id, rows = _read_metrics(path)
        name = run_id
        k = 2
        while name in seen_names:
            name = f"{run_id}#{k}"
            k += 1
        seen_names.add(name)
        loaded.append((name, path, rows))

    cadence = [(row["epoch"], row["iter"]) for row in loaded[0][2]]
    offending = [
        str(path)
        for _, path, rows in loaded[1:]
        if [(row["epoch"], row["iter"]) for row in rows] != cadence
    ]
    if offending:
        raise AlignmentError(
            f"logging cadence differs from {loaded[0][1]}: {', '.join(offending)}"
        )

    metrics_present = []
    per_file_series: dict[str, dict[str, list[float]]] = {}
    for metric in _CHART_METRICS:
        series = {}
        for name, _, rows in loaded:
            values = _metric_series(rows, metric)
            if values is None:
                series = None
                break
            series[name] = values
        if series is not None:
            metrics_present.append(metric)
            per_file_series[metric] = series

    xs = [float(row["iter"]) for row in loaded[0][2]]

    long_csv = out_dir / "comparison.csv"
    with long_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "x", "metric", "value"])
        for metric in metrics_present:
            for name, _, rows in loaded:
                for row in rows:
                    writer.writerow([name, row["iter"], metric, row[metric]])

    chart_paths = []
    for metric in metrics_present:
        series = per_file_series[metric]
        title = metric
        plot = {name: list(zip(xs, values)) for name, values in series.items()}
        if metric in ("train_loss", "test_loss"):
            flat = [v for values in series.values() for v in values]
            if min(flat) > 0.0 and max(flat) / min(flat) > 100.0:
                title = f"log10({metric})"
                plot = {
                    name: [(x, math.log10(v)) for x, v in points]
                    for name, points in plot.items()
                }
        chart_paths.append(charts.line_chart(plot, title, out_dir / f"chart_{metric}.svg"))

    lines = [f"{'series':<28} {'final train_loss':>18} {'final test_loss':>17} "
             f"{'best test_acc':>14} {'final eta':>12} {'probes':>8}"]
    for name, _, rows in loaded:
        final = rows[-1]

        def cell(key: str, width: int, row=final) -> str:
            return (row[key] if row[key] else "-")[:width]

        test_accs = [(float(r["test_acc"]), r["epoch"]) for r in rows if r["test_acc"]]
        best_acc = f"{max(test_accs)[0]:.4f}" if test_accs else "-"
        lines.append(
            f"{name:<28} {cell('train_loss', 18):>18} {cell('test_loss', 17):>17} "
            f"{best_acc:>14} {cell('eta', 12):>12} {cell('probe_evals_cumulative', 8):>8}"
        )
    table = "\n".join(lines)

    return ComparisonResult(long_csv=long_csv, charts=tuple(chart_paths), table=table)
