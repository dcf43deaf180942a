"""Optimizer strategies over a shared mutable state.

All strategies perform the same weight commit, ``w <- w - eta * g``, and
differ in how (or whether) they move ``eta`` afterwards:

* ``basic``: fixed eta (the comparison baseline).
* ``first_order``: gradient descent on eta with meta-rate alpha, using either
  the analytic derivative of the one-step loss (one extra gradient) or a
  two-point finite difference.
* ``second_order``: a Newton step on eta built from the five-point stencil;
  no meta-rate needed.
* ``second_order_momentum``: the Newton delta accumulated through an
  exponential moving buffer.
* ``second_order_valprobe``: stencil losses taken on a validation batch so
  eta chases generalization instead of training loss.
* ``adam``: bias-corrected Adam at a fixed base rate, as a baseline.

After every adaptive update eta is clamped to stay at or above the smoothing
value, so a step can never turn into gradient ascent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DivergenceError
from .objective import Batch, Objective
from .probe import StencilSample, collect_stencil, make_probe, probe_eval

STRATEGIES = (
    "basic",
    "first_order",
    "second_order",
    "second_order_momentum",
    "second_order_valprobe",
    "adam",
)

FIRST_ORDER_BACKENDS = ("analytic", "finite_diff")


@dataclass(frozen=True)
class HyperParams:
    """Strategy hyperparameters; range constraints checked at construction."""

    eta_init: float
    eps_fd: float = 1e-5
    delta_smooth: float = 1e-6
    alpha_meta: float = 0.0
    beta_eta: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.eta_init > 0.0:
            raise ContractViolation(f"eta_init must be > 0, got {self.eta_init}")
        if not self.eps_fd > 0.0:
            raise ContractViolation(f"eps_fd must be > 0, got {self.eps_fd}")
        if not self.delta_smooth > 0.0:
            raise ContractViolation(f"delta_smooth must be > 0, got {self.delta_smooth}")
        if self.alpha_meta < 0.0:
            raise ContractViolation(f"alpha_meta must be >= 0, got {self.alpha_meta}")
        if not 0.0 <= self.beta_eta < 1.0:
            raise ContractViolation(f"beta_eta must be in [0, 1), got {self.beta_eta}")
        if not 0.0 <= self.adam_beta1 < 1.0 or not 0.0 <= self.adam_beta2 < 1.0:
            raise ContractViolation("adam betas must be in [0, 1)")
        if not self.adam_eps > 0.0:
            raise ContractViolation(f"adam_eps must be > 0, got {self.adam_eps}")


@dataclass
class OptimizerState:
    """Mutable per-run training state; owned by exactly one run."""

    w: np.ndarray
    eta: float
    hyper: HyperParams
    t: int = 0
    eta_momentum: float = 0.0
    adam_m: np.ndarray | None = None
    adam_v: np.ndarray | None = None
    last_losses: StencilSample | None = None


@dataclass(frozen=True)
class StepReport:
    """Observability for one step: what moved and what it cost.

    ``probe_count`` counts evaluations beyond the one committed gradient:
    five stencil losses for the second-order family, two probe losses for the
    finite-difference first-order backend, one extra gradient for the
    analytic backend, zero for basic and Adam.  ``pre_loss`` is the stencil
    center (the loss at the newly committed weights); strategies that never
    evaluate it report None rather than paying for an extra evaluation.
    """

    eta_before: float
    eta_after: float
    delta_eta_raw: float
    probe_count: int
    pre_loss: float | None = None


def init_state(initial_params: np.ndarray, hyper: HyperParams) -> OptimizerState:
    return OptimizerState(w=np.array(initial_params, dtype=np.float64), eta=hyper.eta_init, hyper=hyper)


def clamp_eta(eta: float, delta: float) -> float:
    """Positivity floor: max(eta, delta)."""
    if not delta > 0.0:
        raise ContractViolation(f"delta must be > 0, got {delta}")
    return max(eta, delta)


def _commit(state: OptimizerState, g: np.ndarray) -> None:
    new_w = state.w - state.eta * g
    if not np.isfinite(new_w).all():
        raise DivergenceError(
            f"non-finite weights after step {state.t + 1} at eta={state.eta!r}"
        )
    state.w = new_w
    state.t += 1


def _newton_delta(sample: StencilSample, delta_smooth: float) -> float:
    """Raw Newton step on eta from stencil losses, with smoothed denominator.

    When |denominator| falls below the smoothing value it is pushed away from
    zero on its own side (treating an exact zero as positive), so a tiny
    negative curvature is not flipped into a positive one.
    """
    num = sample.f_p1 - sample.f_m1
    denom = sample.f_p2 + sample.f_m2 - 2.0 * sample.f_0
    if abs(denom) < delta_smooth:
        denom = denom + (delta_smooth if denom >= 0.0 else -delta_smooth)
    return -2.0 * sample.eps * num / denom


def step_basic(state: OptimizerState, objective: Objective, batch: Batch) -> StepReport:
    """Plain SGD: commit one step, leave eta alone."""
    g = objective.gradient(state.w, batch)
    eta = state.eta
    _commit(state, g)
    return StepReport(eta_before=eta, eta_after=eta, delta_eta_raw=0.0, probe_count=0)


def step_first_order(
    state: OptimizerState,
    objective: Objective,
    batch: Batch,
    backend: str = "analytic",
) -> StepReport:
    """Commit with the current eta, then move eta by -alpha * f'(eta).

    The analytic backend computes f'(eta) exactly as -g(t) . g(t+1) from the
    gradient at the new weights; the finite-difference backend estimates it
    from two probe losses around eta.
    """
    hp = state.hyper
    if not hp.alpha_meta > 0.0:
        raise ContractViolation("first-order strategy requires alpha_meta > 0")
    if backend not in FIRST_ORDER_BACKENDS:
        raise ContractViolation(f"unknown first-order backend {backend!r}")
    g = objective.gradient(state.w, batch)
    eta = state.eta
    if backend == "finite_diff":
        probe = make_probe(objective, state.w, g, batch)
        f_p = probe_eval(probe, eta + hp.eps_fd)
        f_m = probe_eval(probe, eta - hp.eps_fd)
        fprime = (f_p - f_m) / (2.0 * hp.eps_fd)
        probes = 2
        _commit(state, g)
    else:
        _commit(state, g)
        fprime = float(-np.dot(g, objective.gradient(state.w, batch)))
        probes = 1
    raw = -hp.alpha_meta * fprime
    state.eta = clamp_eta(eta + raw, hp.delta_smooth)
    return StepReport(eta_before=eta, eta_after=state.eta, delta_eta_raw=raw, probe_count=probes)


def _second_order_step(
    state: OptimizerState,
    objective: Objective,
    grad_batch: Batch,
    probe_batch: Batch,
    use_momentum: bool,
) -> StepReport:
    hp = state.hyper
    g = objective.gradient(state.w, grad_batch)
    probe = make_probe(objective, state.w, g, probe_batch)
    sample = collect_stencil(probe, state.eta, hp.eps_fd)
    eta = state.eta
    _commit(state, g)
    state.last_losses = sample
    raw = _newton_delta(sample, hp.delta_smooth)
    if use_momentum:
        state.eta_momentum = hp.beta_eta * state.eta_momentum + raw
        state.eta = clamp_eta(eta + state.eta_momentum, hp.delta_smooth)
    else:
        state.eta = clamp_eta(eta + raw, hp.delta_smooth)
    return StepReport(
        eta_before=eta,
        eta_after=state.eta,
        delta_eta_raw=raw,
        probe_count=5,
        pre_loss=sample.f_0,
    )


def step_second_order(state: OptimizerState, objective: Objective, batch: Batch) -> StepReport:
    """Newton step on eta from the five-point stencil, then clamp.

    Order per step: collect the five stencil losses at the current eta using
    the current weights and gradient; commit the weight update with that same
    eta; update eta from the stencil; clamp.
    """
    return _second_order_step(state, objective, batch, batch, use_momentum=False)


def step_second_order_momentum(
    state: OptimizerState, objective: Objective, batch: Batch
) -> StepReport:
    """Second-order step with the Newton delta fed through a momentum buffer."""
    return _second_order_step(state, objective, batch, batch, use_momentum=True)


def step_second_order_valprobe(
    state: OptimizerState,
    objective: Objective,
    train_batch: Batch,
    val_batch: Batch,
) -> StepReport:
    """Second-order step whose stencil losses come from a validation batch.

    The gradient (and the weight commit) still use the training batch.
    """
    return _second_order_step(state, objective, train_batch, val_batch, use_momentum=False)


def step_adam(state: OptimizerState, objective: Objective, batch: Batch) -> StepReport:
    """Bias-corrected Adam at the fixed base rate ``eta_init``."""
    hp = state.hyper
    if state.adam_m is None:
        state.adam_m = np.zeros_like(state.w)
        state.adam_v = np.zeros_like(state.w)
    if state.adam_m.shape != state.w.shape or state.adam_v.shape != state.w.shape:
        raise ContractViolation("adam buffers do not match parameter count")
    g = objective.gradient(state.w, batch)
    t = state.t + 1
    state.adam_m = hp.adam_beta1 * state.adam_m + (1.0 - hp.adam_beta1) * g
    state.adam_v = hp.adam_beta2 * state.adam_v + (1.0 - hp.adam_beta2) * g * g
    m_hat = state.adam_m / (1.0 - hp.adam_beta1**t)
    v_hat = state.adam_v / (1.0 - hp.adam_beta2**t)
    new_w = state.w - hp.eta_init * m_hat / (np.sqrt(v_hat) + hp.adam_eps)
    if not np.isfinite(new_w).all():
        raise DivergenceError(f"non-finite weights after step {t} (adam)")
    state.w = new_w
    state.t = t
    return StepReport(
        eta_before=hp.eta_init, eta_after=hp.eta_init, delta_eta_raw=0.0, probe_count=0
    )


def make_step_fn(strategy: str, first_order_backend: str = "analytic"):
    """Uniform step callable for the harness.

    Returns ``fn(state, objective, batch, val_batch=None) -> StepReport``;
    only the valprobe strategy consumes ``val_batch``.
    """
    if strategy not in STRATEGIES:
        raise ContractViolation(f"unknown strategy {strategy!r}")
    if strategy == "basic":
        return lambda state, obj, batch, val_batch=None: step_basic(state, obj, batch)
    if strategy == "first_order":
        if first_order_backend not in FIRST_ORDER_BACKENDS:
            raise ContractViolation(f"unknown first-order backend {first_order_backend!r}")
        return lambda state, obj, batch, val_batch=None: step_first_order(
            state, obj, batch, backend=first_order_backend
        )
    if strategy == "second_order":
        return lambda state, obj, batch, val_batch=None: step_second_order(state, obj, batch)
    if strategy == "second_order_momentum":
        return lambda state, obj, batch, val_batch=None: step_second_order_momentum(
            state, obj, batch
        )
    if strategy == "second_order_valprobe":
        def run(state, obj, batch, val_batch=None):
            if val_batch is None:
                raise ContractViolation("valprobe strategy needs a validation batch")
            return step_second_order_valprobe(state, obj, batch, val_batch)

        return run
    return lambda state, obj, batch, val_batch=None: step_adam(state, obj, batch)
