"""Probing the one-step loss curve f(eta) = L(w - eta * g).

An :class:`EtaProbe` freezes the current weights, gradient, and batch, and
answers "what would the loss be after a step of size eta?".  Evaluations
materialize ``w - eta * g`` into a fresh array, so probing never touches
optimizer or model state.  On top of the probe sit the five-point stencil and
central-difference estimates of f' and f'', plus the analytic f' that costs
one extra gradient instead of two loss evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DivergedProbeError
from .objective import Batch, Objective


@dataclass(frozen=True)
class EtaProbe:
    """Frozen snapshot evaluating the loss one step of size eta away."""

    objective: Objective
    w: np.ndarray
    g: np.ndarray
    batch: Batch


@dataclass(frozen=True)
class StencilSample:
    """The five losses f(eta - 2e), f(eta - e), f(eta), f(eta + e), f(eta + 2e)."""

    center: float
    eps: float
    f_m2: float
    f_m1: float
    f_0: float
    f_p1: float
    f_p2: float

    def values(self) -> tuple[float, float, float, float, float]:
        return (self.f_m2, self.f_m1, self.f_0, self.f_p1, self.f_p2)


def make_probe(objective: Objective, w: np.ndarray, g: np.ndarray, batch: Batch) -> EtaProbe:
    w = objective.check_params(w)
    g = np.asarray(g, dtype=np.float64)
    if g.shape != w.shape:
        raise ContractViolation(
            f"gradient shape {g.shape} does not match weights shape {w.shape}"
        )
    return EtaProbe(objective, w, g, batch)


def probe_eval(probe: EtaProbe, eta: float) -> float:
    """f(eta); raises :class:`DivergedProbeError` when the loss is not finite.

    Negative eta is legal: the stencil legitimately reaches below zero when
    the current step size is smaller than twice the stencil spacing.
    """
    value = probe.objective.loss(probe.w - eta * probe.g, probe.batch)
    if not math.isfinite(value):
        raise DivergedProbeError(eta, value)
    return value


def collect_stencil(probe: EtaProbe, eta: float, eps: float) -> StencilSample:
    """Evaluate the probe at the five stencil offsets around ``eta``.

    Exactly five loss evaluations, in fixed order (-2e, -e, 0, +e, +2e) so
    logged losses are bitwise reproducible.
    """
    if eps <= 0.0:
        raise ContractViolation(f"stencil spacing must be positive, got {eps}")
    f_m2 = probe_eval(probe, eta - 2.0 * eps)
    f_m1 = probe_eval(probe, eta - eps)
    f_0 = probe_eval(probe, eta)
    f_p1 = probe_eval(probe, eta + eps)
    f_p2 = probe_eval(probe, eta + 2.0 * eps)
    return StencilSample(eta, eps, f_m2, f_m1, f_0, f_p1, f_p2)


def first_derivative(sample: StencilSample) -> float:
    """Central-difference estimate of f' at the stencil center."""
    return (sample.f_p1 - sample.f_m1) / (2.0 * sample.eps)


def second_derivative(sample: StencilSample) -> float:
    """Central-difference estimate of f'' at the stencil center.

    Uses the wide points, (f(eta+2e) + f(eta-2e) - 2 f(eta)) / (4 e^2).
    A zero result is legal; smoothing near-zero curvature is the caller's job.
    """
    return (sample.f_p2 + sample.f_m2 - 2.0 * sample.f_0) / (4.0 * sample.eps**2)


def analytic_derivative(
    objective: Objective, w: np.ndarray, g: np.ndarray, batch: Batch, eta: float
) -> float:
    """Exact f'(eta) = -g . grad L(w - eta g), at one extra gradient's cost."""
    w = objective.check_params(w)
    g = np.asarray(g, dtype=np.float64)
    if g.shape != w.shape:
        raise ContractViolation(
            f"gradient shape {g.shape} does not match weights shape {w.shape}"
        )
    stepped = objective.gradient(w - eta * g, batch)
    return float(-np.dot(g, stepped))
