"""Concrete differentiable models and a closed-form least-squares oracle.

Three models share the :class:`~autolr.objective.Objective` contract:

* linear regression with summed square loss,
* multinomial logistic regression with summed softmax cross-entropy,
* a small ReLU multi-layer perceptron with the same cross-entropy head.

Every model appends an implicit ones-column for its bias terms, so the
parameter vector stays flat and step arithmetic is uniform.  Convex models
initialize at zero; the MLP draws each layer uniform in [-a, a] with
a = sqrt(6 / (fan_in + fan_out)) from a seeded generator.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, SingularMatrixError
from .objective import (
    CROSS_ENTROPY,
    SQUARE,
    Batch,
    Objective,
    cross_entropy_sum,
    softmax_rows,
)


class LinearRegressionModel(Objective):
    """y ~ X w + b with loss sum((X w + b - y)^2)."""

    loss_kind = SQUARE

    def __init__(self, input_dim: int, seed: int = 0):
        if input_dim <= 0:
            raise ContractViolation(f"input_dim must be positive, got {input_dim}")
        self.input_dim = input_dim
        self.param_count = input_dim + 1
        self.initial_params = np.zeros(self.param_count)

    def predict(self, w: np.ndarray, features: np.ndarray) -> np.ndarray:
        return features @ w[:-1] + w[-1]

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        r = self.predict(w, batch.features) - batch.targets
        return float(r @ r)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        r = self.predict(w, batch.features) - batch.targets
        g = np.empty(self.param_count)
        g[:-1] = 2.0 * (batch.features.T @ r)
        g[-1] = 2.0 * r.sum()
        return g


class LogisticRegressionModel(Objective):
    """Multinomial logistic regression; one weight column plus bias per class."""

    loss_kind = CROSS_ENTROPY

    def __init__(self, input_dim: int, class_count: int, seed: int = 0):
        if input_dim <= 0:
            raise ContractViolation(f"input_dim must be positive, got {input_dim}")
        if class_count < 2:
            raise ContractViolation(f"class_count must be >= 2, got {class_count}")
        self.input_dim = input_dim
        self.class_count = class_count
        self.param_count = (input_dim + 1) * class_count
        self.initial_params = np.zeros(self.param_count)

    def _unpack(self, w: np.ndarray) -> np.ndarray:
        return w.reshape(self.input_dim + 1, self.class_count)

    def logits(self, w: np.ndarray, features: np.ndarray) -> np.ndarray:
        mat = self._unpack(w)
        return features @ mat[:-1] + mat[-1]

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return cross_entropy_sum(self.logits(w, batch.features), batch.targets)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        p = softmax_rows(self.logits(w, batch.features))
        p[np.arange(batch.size), batch.targets] -= 1.0
        g = np.empty((self.input_dim + 1, self.class_count))
        g[:-1] = batch.features.T @ p
        g[-1] = p.sum(axis=0)
        return g.reshape(-1)


class MlpModel(Objective):
    """Fully-connected ReLU network with a softmax cross-entropy head.

    ``layer_sizes`` is [input_dim, hidden..., class_count].  Per layer the
    flat parameter vector holds the weight block (fan_in x fan_out,
    row-major) followed by the bias (fan_out).
    """

    loss_kind = CROSS_ENTROPY

    def __init__(self, layer_sizes: list[int], seed: int = 0):
        if len(layer_sizes) < 2:
            raise ContractViolation("layer_sizes needs at least input and output sizes")
        if any(s <= 0 for s in layer_sizes):
            raise ContractViolation(f"layer sizes must be positive, got {layer_sizes}")
        self.layer_sizes = list(layer_sizes)
        self.input_dim = layer_sizes[0]
        self.class_count = layer_sizes[-1]
        self._spans = []
        offset = 0
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            w_end = offset + fan_in * fan_out
            b_end = w_end + fan_out
            self._spans.append((offset, w_end, b_end, fan_in, fan_out))
            offset = b_end
        self.param_count = offset
        rng = np.random.default_rng(seed)
        init = np.empty(self.param_count)
        for start, _, b_end, fan_in, fan_out in self._spans:
            a = np.sqrt(6.0 / (fan_in + fan_out))
            init[start:b_end] = rng.uniform(-a, a, b_end - start)
        self.initial_params = init

    def _layers(self, w: np.ndarray):
        for start, w_end, b_end, fan_in, fan_out in self._spans:
            yield w[start:w_end].reshape(fan_in, fan_out), w[w_end:b_end]

    def logits(self, w: np.ndarray, features: np.ndarray) -> np.ndarray:
        h = features
        for i, (mat, bias) in enumerate(self._layers(w)):
            z = h @ mat + bias
            h = np.maximum(z, 0.0) if i < len(self._spans) - 1 else z
        return h

    def loss(self, w: np.ndarray, batch: Batch) -> float:
        w = self.check_params(w)
        return cross_entropy_sum(self.logits(w, batch.features), batch.targets)

    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        w = self.check_params(w)
        # Forward pass keeping activations for backprop.
        acts = [batch.features]
        pre = []
        h = batch.features
        for i, (mat, bias) in enumerate(self._layers(w)):
            z = h @ mat + bias
            pre.append(z)
            h = np.maximum(z, 0.0) if i < len(self._spans) - 1 else z
            acts.append(h)
        delta = softmax_rows(acts[-1])
        delta[np.arange(batch.size), batch.targets] -= 1.0
        g = np.empty(self.param_count)
        for i in range(len(self._spans) - 1, -1, -1):
            start, w_end, b_end, fan_in, fan_out = self._spans[i]
            g[start:w_end] = (acts[i].T @ delta).reshape(-1)
            g[w_end:b_end] = delta.sum(axis=0)
            if i > 0:
                mat = w[start:w_end].reshape(fan_in, fan_out)
                delta = (delta @ mat.T) * (pre[i - 1] > 0.0)
        return g

    def min_abs_preactivation(self, w: np.ndarray, features: np.ndarray) -> float:
        """Smallest |pre-activation| over all hidden units and rows.

        Used by gradient checks to stay away from ReLU kinks.
        """
        w = self.check_params(w)
        h = features
        smallest = np.inf
        for i, (mat, bias) in enumerate(self._layers(w)):
            if i == len(self._spans) - 1:
                break
            z = h @ mat + bias
            smallest = min(smallest, float(np.abs(z).min()))
            h = np.maximum(z, 0.0)
        return smallest


def build_linreg(input_dim: int, seed: int = 0) -> LinearRegressionModel:
    return LinearRegressionModel(input_dim, seed)


def build_logreg(input_dim: int, class_count: int, seed: int = 0) -> LogisticRegressionModel:
    return LogisticRegressionModel(input_dim, class_count, seed)


def build_mlp(layer_sizes: list[int], seed: int = 0) -> MlpModel:
    return MlpModel(layer_sizes, seed)


def least_squares_closed_form(batch: Batch, add_bias: bool = True) -> np.ndarray:
    """Exact minimizer of the summed square loss via the normal equations.

    With ``add_bias`` the design matrix gets a trailing ones-column so the
    result lines up with :class:`LinearRegressionModel` parameters.  The
    Gram matrix is factorized with Cholesky; a pivot below 1e-10 of the
    largest diagonal entry (or a failed factorization) raises
    :class:`SingularMatrixError`.
    """
    x = batch.features
    if add_bias:
        x = np.hstack([x, np.ones((batch.size, 1))])
    if batch.size < x.shape[1]:
        raise SingularMatrixError(
            f"need at least {x.shape[1]} rows to solve for {x.shape[1]} parameters, "
            f"got {batch.size}"
        )
    gram = x.T @ x
    rhs = x.T @ batch.targets
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"normal equations are singular: {exc}") from exc
    pivots = np.diag(chol) ** 2
    floor = 1e-10 * float(np.diag(gram).max())
    if pivots.min() < floor:
        raise SingularMatrixError(
            f"near-singular normal equations: pivot {pivots.min():g} below "
            f"threshold {floor:g}"
        )
    y = np.linalg.solve(chol, rhs)
    return np.linalg.solve(chol.T, y)
