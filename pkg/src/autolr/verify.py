"""Independent checks: numerical gradient verification and a brute-force
line search over the step size.

Nothing here touches optimizer code.  Both tools only evaluate losses, so
they can referee the adaptive methods without sharing their arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DivergedProbeError, DivergenceError
from .objective import Batch, Objective
from .probe import EtaProbe, probe_eval

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERS = 80


@dataclass(frozen=True)
class GradCheckReport:
    """Worst-case relative disagreement between analytic and central-difference
    gradients, with the coordinate that produced it."""

    max_rel_error: float
    worst_coordinate: int
    h_used: float


def gradcheck(objective: Objective, w: np.ndarray, batch: Batch, h: float = 1e-6) -> GradCheckReport:
    """Compare the analytic gradient against central differences per coordinate.

    The error at coordinate i is |analytic_i - numeric_i| / max(1, |analytic_i|),
    which stays meaningful when the true derivative is near zero.
    """
    if h <= 0.0:
        raise ContractViolation(f"step h must be positive, got {h}")
    objective.check_params(w)
    analytic = objective.gradient(w, batch)
    worst = 0.0
    worst_i = 0
    for i in range(w.shape[0]):
        shifted = w.copy()
        shifted[i] = w[i] + h
        loss_plus = objective.loss(shifted, batch)
        shifted[i] = w[i] - h
        loss_minus = objective.loss(shifted, batch)
        if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
            raise DivergenceError(f"non-finite loss while probing coordinate {i}")
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        rel = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]))
        if rel > worst:
            worst = rel
            worst_i = i
    return GradCheckReport(max_rel_error=worst, worst_coordinate=worst_i, h_used=h)


@dataclass(frozen=True)
class LineSearchResult:
    eta_star: float
    f_star: float
    lo: float
    hi: float
    points: int
    diverged_points: int


def _better(eta: float, value: float, best_eta: float, best_value: float) -> bool:
    if value < best_value:
        return True
    return value == best_value and eta < best_eta


def line_search_oracle(
    probe: EtaProbe, lo: float, hi: float, points: int
) -> LineSearchResult:
    """Grid scan plus golden-section refinement of the step-size response.

    Evaluates the probe on a uniform grid over [lo, hi], then refines inside
    the bracket around the grid minimiser.  Diverged evaluations are skipped;
    it is only an error if every grid point diverges.  Ties resolve to the
    smallest step size.
    """
    if not lo < hi:
        raise ContractViolation(f"need lo < hi, got [{lo}, {hi}]")
    if points < 3:
        raise ContractViolation(f"need at least 3 grid points, got {points}")

    grid = np.linspace(lo, hi, points)
    values = np.full(points, np.inf)
    diverged = 0
    for i, eta in enumerate(grid):
        try:
            values[i] = probe_eval(probe, float(eta))
        except DivergedProbeError:
            diverged += 1
    if diverged == points:
        raise DivergenceError(
            f"line search found no finite loss on [{lo}, {hi}] with {points} points"
        )

    best_i = int(np.argmin(values))
    best_eta = float(grid[best_i])
    best_value = float(values[best_i])

    a = float(grid[max(best_i - 1, 0)])
    b = float(grid[min(best_i + 1, points - 1)])

    def safe_eval(eta: float) -> float:
        try:
            return probe_eval(probe, eta)
        except DivergedProbeError:
            return math.inf

    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = safe_eval(x1)
    f2 = safe_eval(x2)
    for _ in range(GOLDEN_ITERS):
        if _better(x1, f1, best_eta, best_value):
            best_eta, best_value = x1, f1
        if _better(x2, f2, best_eta, best_value):
            best_eta, best_value = x2, f2
        if f1 <= f2:
            b = x2
            x2, f2 = x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = safe_eval(x1)
        else:
            a = x1
            x1, f1 = x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = safe_eval(x2)

    return LineSearchResult(
        eta_star=best_eta,
        f_star=best_value,
        lo=lo,
        hi=hi,
        points=points,
        diverged_points=diverged,
    )
