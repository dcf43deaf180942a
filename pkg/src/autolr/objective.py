"""Differentiable-objective contract shared by models and optimizers.

A parameter vector is a flat 1-D float64 ``numpy`` array.  An objective knows
how many parameters it has and can evaluate a scalar loss and its gradient on
a :class:`Batch`.  Losses are summed over the batch (not averaged), so the
loss of a batch is the sum of per-example losses.  Both evaluations are pure:
the same (weights, batch) always produces the same bits.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

SQUARE = "square"
CROSS_ENTROPY = "cross_entropy"


@dataclass(frozen=True)
class Batch:
    """A minibatch: feature rows plus one target per row.

    Targets are floats for regression and integer class indices for
    classification.  Arrays are frozen at construction; batches may be shared
    freely.
    """

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise ContractViolation(f"features must be 2-D, got shape {features.shape}")
        targets = np.asarray(self.targets)
        if targets.dtype.kind in "iu":
            targets = targets.astype(np.int64)
        else:
            targets = targets.astype(np.float64)
        if targets.ndim != 1:
            raise ContractViolation(f"targets must be 1-D, got shape {targets.shape}")
        if features.shape[0] != targets.shape[0]:
            raise ContractViolation(
                f"feature rows ({features.shape[0]}) != targets length ({targets.shape[0]})"
            )
        if features.shape[0] < 1:
            raise ContractViolation("batch must contain at least one example")
        features = features.copy() if features.flags.writeable else features
        targets = targets.copy() if targets.flags.writeable else targets
        features.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]


class Objective(ABC):
    """Contract for anything the optimizers can train.

    Subclasses fix ``param_count`` and ``loss_kind`` and implement the two
    evaluations.  Instances are immutable after construction and safe to share
    across threads.
    """

    param_count: int
    loss_kind: str

    def check_params(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != self.param_count:
            raise ContractViolation(
                f"expected parameter vector of length {self.param_count}, "
                f"got shape {w.shape}"
            )
        return w

    @abstractmethod
    def loss(self, w: np.ndarray, batch: Batch) -> float:
        """Summed loss of ``w`` on ``batch``; finite and non-negative."""

    @abstractmethod
    def gradient(self, w: np.ndarray, batch: Batch) -> np.ndarray:
        """Gradient of :meth:`loss` with respect to ``w``; same length as ``w``."""


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by subtracting the row max."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy_sum(logits: np.ndarray, classes: np.ndarray) -> float:
    """Summed softmax cross-entropy of integer ``classes`` under ``logits``.

    Uses the log-sum-exp form so large logits stay finite.
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(logits.shape[0]), classes]
    return float(np.sum(lse - picked))
