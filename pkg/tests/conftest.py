"""Shared toy objectives and helpers for the test suite.

The closed-form objectives here make the optimizer math checkable by hand:
on ``ScalarQuadratic(scale=0.5)`` with w=2 the eta-probe is exactly
f(eta) = 2*(1 - eta)**2, so Newton steps, stencil values, and derivative
estimates all have pencil-and-paper answers.
"""

from __future__ import annotations

import csv
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from autolr.objective import CROSS_ENTROPY, SQUARE, Batch, Objective

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
CONFIG_DIR = REPO_ROOT / "configs"


class ScalarQuadratic(Objective):
    """L(w) = scale * sum(w**2); the batch is ignored.

    With scale=0.5 and w=[2] the gradient at w is exactly [2] and the
    eta-probe along it is f(eta) = 2*(1 - eta)**2, minimized at eta=1.
    A negative scale gives a concave loss for exercising the smoothed
    Newton denominator and divergence handling.
    """

    loss_kind = SQUARE

    def __init__(self, dim: int = 1, scale: float = 0.5):
        self.param_count = dim
        self.scale = scale

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return float(self.scale * np.dot(w, w))

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        return 2.0 * self.scale * w


class CubicObjective(Objective):
    """L(w) = sum(w**3) on one parameter; the batch is ignored.

    Probing from w=0 along g=-1 gives f(eta) = eta**3, the standard
    worked example for finite-difference error terms.
    """

    loss_kind = SQUARE
    param_count = 1

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return float(np.sum(w**3))

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        return 3.0 * w * w


class LinearObjective(Objective):
    """L(w) = c . w, a flat objective with identically zero curvature."""

    loss_kind = SQUARE

    def __init__(self, c: np.ndarray):
        self.c = np.asarray(c, dtype=np.float64)
        self.param_count = self.c.shape[0]

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return float(np.dot(self.c, w))

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        self.check_params(w)
        return self.c.copy()


class SpdQuadratic(Objective):
    """L(w) = 0.5 * w'Aw - b'w + c with symmetric positive definite A.

    The exact minimizer of the eta-probe from (w, g) is
    eta* = (g'r) / (g'Ag) with r = Aw - b, so Newton steps on the probe
    can be compared against a closed form.
    """

    loss_kind = SQUARE

    def __init__(self, a: np.ndarray, b: np.ndarray, c: float = 0.0):
        self.a = np.asarray(a, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.c = float(c)
        self.param_count = self.b.shape[0]

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return float(0.5 * w @ self.a @ w - self.b @ w + self.c)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        return self.a @ w - self.b

    def probe_minimizer(self, w: np.ndarray, g: np.ndarray) -> float:
        """Exact argmin of eta -> L(w - eta*g)."""
        r = self.a @ w - self.b
        return float((g @ r) / (g @ self.a @ g))


class TargetQuadratic(Objective):
    """L(w) = 0.5 * sum_r (w[0] - target_r)**2; the loss depends on the batch.

    Lets train and validation batches disagree about the best step size,
    which is the whole point of the validation-probe strategy.
    """

    loss_kind = SQUARE
    param_count = 1

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        r = w[0] - batch.targets
        return float(0.5 * np.dot(r, r))

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        return np.array([float(np.sum(w[0] - batch.targets))])


class ScaledObjective(Objective):
    """Wrap another objective and multiply its loss (and gradient) by lam."""

    def __init__(self, base: Objective, lam: float):
        self.base = base
        self.lam = float(lam)
        self.param_count = base.param_count
        self.loss_kind = base.loss_kind

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        return self.lam * self.base.loss(w, batch)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        return self.lam * self.base.gradient(w, batch)


class CountingObjective(Objective):
    """Wrap another objective and tally loss/gradient evaluations."""

    def __init__(self, base: Objective):
        self.base = base
        self.param_count = base.param_count
        self.loss_kind = base.loss_kind
        self.loss_calls = 0
        self.gradient_calls = 0
        self.loss_args: list[np.ndarray] = []

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        self.loss_calls += 1
        self.loss_args.append(np.array(w, dtype=np.float64))
        return self.base.loss(w, batch)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        self.gradient_calls += 1
        return self.base.gradient(w, batch)


def dummy_batch(dim: int = 1, size: int = 1) -> Batch:
    """A placeholder batch for objectives that ignore their batch."""
    return Batch(np.zeros((size, dim)), np.zeros(size))


def random_spd_case(rng: np.random.Generator, n: int) -> tuple[SpdQuadratic, np.ndarray]:
    """A well-conditioned SPD quadratic and a random start away from optimum."""
    m = rng.standard_normal((n, n))
    a = m.T @ m + n * np.eye(n)
    b = rng.standard_normal(n)
    w = rng.standard_normal(n) * 2.0
    return SpdQuadratic(a, b), w


# Minimal runnable experiment configs.  Tests copy one, tweak keys (None
# deletes), and render the result to a file next to its output directory.
TINY_CLASSIFICATION = {
    "dataset.kind": "synthetic_classification",
    "dataset.n": "32",
    "dataset.dim": "3",
    "dataset.classes": "3",
    "dataset.separation": "2.0",
    "split.train": "24",
    "split.test": "8",
    "model.kind": "logreg",
    "strategy": "second_order",
    "hyper.eta_init": "0.1",
    "epochs": "3",
}

TINY_REGRESSION = {
    "dataset.kind": "synthetic_regression",
    "dataset.n": "32",
    "dataset.dim": "3",
    "split.train": "24",
    "split.test": "8",
    "model.kind": "linreg",
    "strategy": "second_order",
    "hyper.eta_init": "0.01",
    "epochs": "3",
}


def read_metrics(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a metrics CSV into its header and one dict per data row."""
    with Path(path).open(newline="") as fh:
        raw = list(csv.reader(fh))
    header = raw[0]
    return header, [dict(zip(header, row)) for row in raw[1:]]


def write_config(dir_path: Path, base: dict, name: str = "run", **overrides) -> Path:
    dir_path.mkdir(parents=True, exist_ok=True)
    pairs = dict(base)
    pairs["output_dir"] = str(dir_path / "runs")
    for key, value in overrides.items():
        key = key.replace("__", ".")
        if value is None:
            pairs.pop(key, None)
        else:
            pairs[key] = value
    path = dir_path / f"{name}.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in pairs.items()))
    return path


@pytest.fixture
def quad1d() -> ScalarQuadratic:
    return ScalarQuadratic(dim=1, scale=0.5)


@pytest.fixture
def batch1() -> Batch:
    return dummy_batch(dim=1)


@pytest.fixture(scope="session")
def run_shipped(tmp_path_factory):
    """Run a shipped config once per session and cache its metrics CSV.

    The expensive runs (the MNIST-style subset in particular) are shared
    between the harness tests and the acceptance criteria.
    """
    from autolr.config import parse_config
    from autolr.harness import run_experiment

    out_root = tmp_path_factory.mktemp("shipped_runs")
    cache: dict[str, Path] = {}

    def run(name: str) -> Path:
        if name not in cache:
            config = parse_config(CONFIG_DIR / f"{name}.cfg")
            config = replace(config, output_dir=out_root / name)
            cache[name] = run_experiment(config, verbose=False)
        return cache[name]

    return run
