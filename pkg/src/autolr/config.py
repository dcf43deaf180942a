"""Flat `key = value` experiment configs.

The grammar is line oriented: blank lines and lines starting with '#' are
ignored, everything else must be `key = value` with a dotted key from the
table in CONFIG_GRAMMAR (also shown by `autolr --help`).  Keys may appear
once.  Relative data paths resolve against the config file's directory, so
shipped configs run from anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .data import SplitSpec
from .errors import ConfigError
from .optim import FIRST_ORDER_BACKENDS, STRATEGIES, HyperParams

MODEL_KINDS = ("linreg", "logreg", "mlp")
DATASET_KINDS = ("boston_csv", "mnist_idx", "synthetic_regression", "synthetic_classification")

CONFIG_GRAMMAR = """\
config file grammar (one `key = value` per line, '#' comments, dotted keys):

  dataset.kind            boston_csv | mnist_idx | synthetic_regression |
                          synthetic_classification
  dataset.path            CSV file (boston_csv); relative to the config file
  dataset.target_column   header name or 0-based index (default: target)
  dataset.has_header      true | false (default: true)
  dataset.images_path     IDX image file (mnist_idx)
  dataset.labels_path     IDX label file (mnist_idx)
  dataset.n               example count (synthetic kinds)
  dataset.dim             feature count (synthetic kinds)
  dataset.noise_std       target noise (synthetic_regression, default 0.0)
  dataset.classes         class count (synthetic_classification)
  dataset.separation      distance between class means (synthetic_classification)
  dataset.seed            synthesis seed (default 0)

  normalize               true | false; z-score features by train-split stats
                          (default: true for boston_csv, false otherwise)
  split.train             training rows (required)
  split.test              test rows (default 0)
  split.val               validation rows (default 0; required > 0 for the
                          second_order_valprobe strategy)
  split.seed              split permutation seed (default 0)

  model.kind              linreg | logreg | mlp
  model.layer_sizes       comma-separated layer widths, mlp only; first and
                          last must match the data (e.g. 4,16,3)

  strategy                basic | first_order | second_order |
                          second_order_momentum | second_order_valprobe | adam
  first_order.backend     analytic | finite_diff (default: analytic)

  hyper.eta_init          starting learning rate (required)
  hyper.eps_fd            stencil half-width epsilon (default 1e-5)
  hyper.delta_smooth      curvature smoothing / eta floor delta (default 1e-6)
  hyper.alpha_meta        first-order meta learning rate (default 0.0;
                          must be > 0 for strategy = first_order)
  hyper.beta_eta          momentum on the eta update (default 0.9)
  hyper.adam_beta1        Adam first-moment decay (default 0.9)
  hyper.adam_beta2        Adam second-moment decay (default 0.999)
  hyper.adam_eps          Adam denominator epsilon (default 1e-8)

  batch_size              minibatch size; 0 = full batch (default 0)
  epochs                  epoch count (required); a full-batch epoch is one
                          iteration
  log_every               minibatch runs log every K-th iteration plus each
                          epoch end; full-batch runs log every iteration
                          (default 10)
  run_seed                seed for batch order and model init (default 0)
  run_id                  metrics file stem (default: config file stem)
  output_dir              metrics directory, relative to the working
                          directory (default: runs)
"""

_KNOWN_KEYS = {
    "dataset.kind",
    "dataset.path",
    "dataset.target_column",
    "dataset.has_header",
    "dataset.images_path",
    "dataset.labels_path",
    "dataset.n",
    "dataset.dim",
    "dataset.noise_std",
    "dataset.classes",
    "dataset.separation",
    "dataset.seed",
    "normalize",
    "split.train",
    "split.test",
    "split.val",
    "split.seed",
    "model.kind",
    "model.layer_sizes",
    "strategy",
    "first_order.backend",
    "hyper.eta_init",
    "hyper.eps_fd",
    "hyper.delta_smooth",
    "hyper.alpha_meta",
    "hyper.beta_eta",
    "hyper.adam_beta1",
    "hyper.adam_beta2",
    "hyper.adam_eps",
    "batch_size",
    "epochs",
    "log_every",
    "run_seed",
    "run_id",
    "output_dir",
}


@dataclass(frozen=True)
class CsvDatasetSpec:
    path: Path
    target_column: str | int
    has_header: bool


@dataclass(frozen=True)
class IdxDatasetSpec:
    images_path: Path
    labels_path: Path


@dataclass(frozen=True)
class SyntheticRegressionSpec:
    n: int
    dim: int
    noise_std: float
    seed: int


@dataclass(frozen=True)
class SyntheticClassificationSpec:
    n: int
    dim: int
    classes: int
    separation: float
    seed: int


DatasetSpec = CsvDatasetSpec | IdxDatasetSpec | SyntheticRegressionSpec | SyntheticClassificationSpec


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_kind: str
    dataset: DatasetSpec
    normalize: bool
    split: SplitSpec
    model_kind: str
    layer_sizes: tuple[int, ...] | None
    strategy: str
    first_order_backend: str
    hyper: HyperParams
    batch_size: int
    epochs: int
    log_every: int
    run_seed: int
    run_id: str
    output_dir: Path
    source_path: Path


def _read_pairs(path: Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        if key in pairs:
            raise ConfigError(f"{path}:{line_no}: duplicate config key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{line_no}: empty value for {key!r}")
        pairs[key] = value
    return pairs


class _Reader:
    """Typed access to the raw pair table with config-flavoured errors."""

    def __init__(self, pairs: dict[str, str], path: Path):
        self.pairs = pairs
        self.path = path
        self.used: set[str] = set()

    def _raw(self, key: str, default, required: bool):
        if key in self.pairs:
            self.used.add(key)
            return self.pairs[key]
        if required:
            raise ConfigError(f"{self.path}: missing required key {key!r}")
        return default

    def text(self, key: str, default: str | None = None, required: bool = False) -> str | None:
        return self._raw(key, default, required)

    def integer(self, key: str, default: int | None = None, required: bool = False) -> int | None:
        raw = self._raw(key, None, required)
        if raw is None:
            return default
        try:
            return int(raw, 10)
        except ValueError:
            raise ConfigError(f"{self.path}: {key} must be an integer, got {raw!r}") from None

    def real(self, key: str, default: float | None = None, required: bool = False) -> float | None:
        raw = self._raw(key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.path}: {key} must be a number, got {raw!r}") from None

    def boolean(self, key: str, default: bool | None = None, required: bool = False) -> bool | None:
        raw = self._raw(key, None, required)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("true", "false"):
            return lowered == "true"
        raise ConfigError(f"{self.path}: {key} must be true or false, got {raw!r}")

    def choice(self, key: str, options: tuple[str, ...], default: str | None = None,
               required: bool = False) -> str | None:
        raw = self._raw(key, None, required)
        if raw is None:
            return default
        if raw not in options:
            raise ConfigError(
                f"{self.path}: {key} must be one of {', '.join(options)}; got {raw!r}"
            )
        return raw

    def reject_unused(self):
        stray = sorted(set(self.pairs) - self.used)
        if stray:
            raise ConfigError(
                f"{self.path}: key(s) not valid here: {', '.join(stray)}"
            )


def _resolve_file(base: Path, value: str, key: str, config_path: Path) -> Path:
    resolved = (base / value).resolve() if not Path(value).is_absolute() else Path(value)
    if not resolved.is_file():
        raise ConfigError(f"{config_path}: {key} points at missing file {resolved}")
    return resolved


def _dataset_spec(reader: _Reader, base: Path, kind: str) -> DatasetSpec:
    cfg = reader.path
    if kind == "boston_csv":
        path = _resolve_file(base, reader.text("dataset.path", required=True), "dataset.path", cfg)
        target = reader.text("dataset.target_column", default="target")
        has_header = reader.boolean("dataset.has_header", default=True)
        if not has_header:
            try:
                target = int(target, 10)
            except ValueError:
                raise ConfigError(
                    f"{cfg}: dataset.target_column must be a column index when "
                    f"dataset.has_header = false, got {target!r}"
                ) from None
        return CsvDatasetSpec(path=path, target_column=target, has_header=has_header)
    if kind == "mnist_idx":
        images = _resolve_file(
            base, reader.text("dataset.images_path", required=True), "dataset.images_path", cfg
        )
        labels = _resolve_file(
            base, reader.text("dataset.labels_path", required=True), "dataset.labels_path", cfg
        )
        return IdxDatasetSpec(images_path=images, labels_path=labels)
    n = reader.integer("dataset.n", required=True)
    dim = reader.integer("dataset.dim", required=True)
    seed = reader.integer("dataset.seed", default=0)
    if n < 1 or dim < 1:
        raise ConfigError(f"{cfg}: dataset.n and dataset.dim must be positive")
    if seed < 0:
        raise ConfigError(f"{cfg}: dataset.seed must be non-negative")
    if kind == "synthetic_regression":
        noise = reader.real("dataset.noise_std", default=0.0)
        if noise < 0:
            raise ConfigError(f"{cfg}: dataset.noise_std must be non-negative")
        return SyntheticRegressionSpec(n=n, dim=dim, noise_std=noise, seed=seed)
    classes = reader.integer("dataset.classes", required=True)
    separation = reader.real("dataset.separation", required=True)
    if classes < 2:
        raise ConfigError(f"{cfg}: dataset.classes must be at least 2")
    if separation <= 0:
        raise ConfigError(f"{cfg}: dataset.separation must be positive")
    return SyntheticClassificationSpec(
        n=n, dim=dim, classes=classes, separation=separation, seed=seed
    )


_REGRESSION_KINDS = ("boston_csv", "synthetic_regression")


def parse_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a config file into an ExperimentConfig.

    Every violation raises ConfigError with the file (and line where it
    makes sense), so the CLI can exit 2 with a message that names the
    offending key.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    reader = _Reader(_read_pairs(path), path)
    base = path.parent

    dataset_kind = reader.choice("dataset.kind", DATASET_KINDS, required=True)
    dataset = _dataset_spec(reader, base, dataset_kind)
    normalize = reader.boolean("normalize", default=(dataset_kind == "boston_csv"))

    split = SplitSpec(
        train_count=reader.integer("split.train", required=True),
        test_count=reader.integer("split.test", default=0),
        val_count=reader.integer("split.val", default=0),
        shuffle_seed=reader.integer("split.seed", default=0),
    )
    if split.train_count < 1:
        raise ConfigError(f"{path}: split.train must be at least 1")

    model_kind = reader.choice("model.kind", MODEL_KINDS, required=True)
    layer_sizes: tuple[int, ...] | None = None
    if model_kind == "mlp":
        raw = reader.text("model.layer_sizes", required=True)
        try:
            layer_sizes = tuple(int(part.strip(), 10) for part in raw.split(","))
        except ValueError:
            raise ConfigError(
                f"{path}: model.layer_sizes must be comma-separated integers, got {raw!r}"
            ) from None
        if len(layer_sizes) < 2 or any(s < 1 for s in layer_sizes):
            raise ConfigError(f"{path}: model.layer_sizes needs >= 2 positive sizes")
    regression_data = dataset_kind in _REGRESSION_KINDS
    if model_kind == "linreg" and not regression_data:
        raise ConfigError(f"{path}: model.kind linreg needs a regression dataset")
    if model_kind != "linreg" and regression_data:
        raise ConfigError(f"{path}: model.kind {model_kind} needs a classification dataset")

    strategy = reader.choice("strategy", STRATEGIES, required=True)
    backend = reader.choice("first_order.backend", FIRST_ORDER_BACKENDS, default="analytic")
    if strategy == "second_order_valprobe" and split.val_count < 1:
        raise ConfigError(f"{path}: strategy second_order_valprobe requires split.val > 0")

    try:
        hyper = HyperParams(
            eta_init=reader.real("hyper.eta_init", required=True),
            eps_fd=reader.real("hyper.eps_fd", default=1e-5),
            delta_smooth=reader.real("hyper.delta_smooth", default=1e-6),
            alpha_meta=reader.real("hyper.alpha_meta", default=0.0),
            beta_eta=reader.real("hyper.beta_eta", default=0.9),
            adam_beta1=reader.real("hyper.adam_beta1", default=0.9),
            adam_beta2=reader.real("hyper.adam_beta2", default=0.999),
            adam_eps=reader.real("hyper.adam_eps", default=1e-8),
        )
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if strategy == "first_order" and hyper.alpha_meta <= 0.0:
        raise ConfigError(f"{path}: strategy first_order requires hyper.alpha_meta > 0")

    batch_size = reader.integer("batch_size", default=0)
    epochs = reader.integer("epochs", required=True)
    log_every = reader.integer("log_every", default=10)
    run_seed = reader.integer("run_seed", default=0)
    if batch_size < 0:
        raise ConfigError(f"{path}: batch_size must be >= 0 (0 means full batch)")
    if epochs < 1:
        raise ConfigError(f"{path}: epochs must be at least 1")
    if log_every < 1:
        raise ConfigError(f"{path}: log_every must be at least 1")
    if run_seed < 0:
        raise ConfigError(f"{path}: run_seed must be non-negative")

    run_id = reader.text("run_id", default=path.stem)
    output_dir = Path(reader.text("output_dir", default="runs"))
    reader.reject_unused()

    return ExperimentConfig(
        dataset_kind=dataset_kind,
        dataset=dataset,
        normalize=normalize,
        split=split,
        model_kind=model_kind,
        layer_sizes=layer_sizes,
        strategy=strategy,
        first_order_backend=backend,
        hyper=hyper,
        batch_size=batch_size,
        epochs=epochs,
        log_every=log_every,
        run_seed=run_seed,
        run_id=run_id,
        output_dir=output_dir,
        source_path=path,
    )
