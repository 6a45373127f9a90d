"""Boosting-style multicalibration by projected steps on the prediction table.

Residual correlations are normalized: for weight function w,

    z_w = (1/d) * E[<w(f(x), x), y - f(x)>]

with d the problem's calibration scale (m for matchings and best action, the
rank for matroids). A predictor is (W, alpha)-multicalibrated iff every
|z_w| <= alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from calibmatch.errors import ConvergenceError, InputError
from calibmatch.model import (
    FiniteDistribution,
    SampleBatch,
    TabularPredictor,
    mse_potential,
    sample,
    substream,
)
from calibmatch.weights import WeightFunction

CONVERGED = "converged"
ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class Violation:
    weight_id: str
    sign: int
    z: float
    index: int = 0


@dataclass(frozen=True)
class TraceRow:
    iter: int
    weight_id: str
    sign: int
    potential: float
    z: float


@dataclass
class CalibrationTrace:
    rows: list = field(default_factory=list)
    status: str = CONVERGED
    iterations: int = 0
    initial_potential: float = math.nan
    final_potential: float = math.nan
    check_calls: int = 0
    samples_used: int = 0

    def decreases(self) -> np.ndarray:
        """Potential drop of every recorded step (needs exact potentials)."""
        phi = [r.potential for r in self.rows] + [self.final_potential]
        return -np.diff(np.asarray(phi))


@dataclass(frozen=True)
class CalibrationParams:
    alpha: float
    eta: float | None = None
    max_iter: int | None = None
    mode: str = "exact"
    samples_per_call: int | None = None
    seed: int = 0
    scale: int | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if self.mode not in ("exact", "empirical"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.mode == "empirical" and not (self.samples_per_call and self.samples_per_call >= 1):
            raise InputError("empirical mode needs samples_per_call >= 1")

    @property
    def step(self) -> float:
        return self.alpha / 2 if self.eta is None else self.eta


def _ceil(x: float) -> int:
    # absorbs float noise such as 4*0.64/0.1**2 == 255.99999999999994
    return max(0, math.ceil(x - 1e-9 * max(1.0, abs(x))))


def project_box(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if np.isnan(v).any():
        raise InputError("NaN in vector to project")
    return np.clip(v, 0.0, 1.0)


def _scale(W: Sequence[WeightFunction], m: int, scale: int | None) -> int:
    if scale is not None:
        return scale
    if W:
        return W[0].problem.calibration_scale
    return m


def exact_correlations(dist: FiniteDistribution, table: np.ndarray,
                       W: Sequence[WeightFunction], scale: int | None = None) -> np.ndarray:
    d = _scale(W, table.shape[1], scale)
    resid = dist.means - table
    return np.array([dist.probs @ (w.matrix(table) * resid).sum(axis=1) / d for w in W])


def empirical_correlations(samples: SampleBatch, table: np.ndarray,
                           W: Sequence[WeightFunction], scale: int | None = None) -> np.ndarray:
    # weights depend on the sample only through its context, so the
    # empirical mean reduces to per-context counts and label sums
    d = _scale(W, table.shape[1], scale)
    counts, sums = samples.context_statistics(table.shape[0])
    resid = sums - counts[:, None] * table
    n = len(samples)
    return np.array([(w.matrix(table) * resid).sum() / (d * n) for w in W])


def _first_violation(z: np.ndarray, W, threshold: float) -> Violation | None:
    for i, zi in enumerate(z):
        if abs(zi) > threshold:
            return Violation(W[i].id, 1 if zi > 0 else -1, float(zi), i)
    return None


def check_exact(dist: FiniteDistribution, predictor: TabularPredictor,
                W: Sequence[WeightFunction], alpha: float,
                scale: int | None = None) -> Violation | None:
    """First w (in W order) with |z_w| > alpha, or None when calibrated."""
    z = exact_correlations(dist, predictor.table, W, scale)
    return _first_violation(z, W, alpha)


def check_empirical(samples: SampleBatch, predictor: TabularPredictor,
                    W: Sequence[WeightFunction], alpha: float,
                    scale: int | None = None) -> Violation | None:
    """Sample version of the oracle; flags |z_hat_w| > alpha/2."""
    if len(samples) < 1:
        raise InputError("check_empirical needs at least one sample")
    z = empirical_correlations(samples, predictor.table, W, scale)
    return _first_violation(z, W, alpha / 2)


def audit(dist: FiniteDistribution, predictor: TabularPredictor,
          W: Sequence[WeightFunction], scale: int | None = None) -> float:
    """max_w |z_w|; the predictor is (W, alpha)-multicalibrated iff this is <= alpha."""
    if not W:
        return 0.0
    return float(np.max(np.abs(exact_correlations(dist, predictor.table, W, scale))))


def iteration_bound(r: float, scale: int, alpha: float) -> int:
    return _ceil(4.0 * r / (scale * alpha**2))


def hoeffding_sample_size(W_size: int, alpha: float, delta0: float) -> int:
    """Smallest N with 2 |W| exp(-N alpha^2 / 8) <= delta0 (at least 1)."""
    if W_size < 1:
        raise InputError("weight class must be nonempty")
    if not 0 < alpha < 1 or not 0 < delta0 <= 1:
        raise InputError(f"need alpha in (0,1) and delta0 in (0,1], got {alpha}, {delta0}")

    def ok(n):
        return 2 * W_size * math.exp(-n * alpha**2 / 8) <= delta0

    n = max(1, math.ceil(8 * math.log(2 * W_size / delta0) / alpha**2))
    while n > 1 and ok(n - 1):
        n -= 1
    while not ok(n):
        n += 1
    return n


@dataclass(frozen=True)
class SampleBudget:
    T_max: int
    N_per_call: int
    total: int
    delta0: float


def plan_sample_budget(r: float, m: int, alpha: float, delta: float, W_size: int) -> SampleBudget:
    """Iteration cap and per-call batch size for the empirical oracle.

    Each of the T_max calls gets failure probability
    delta0 = m alpha^2 delta / (4 r), so a union bound covers the whole run.
    """
    if r < 0 or m < 1 or not alpha > 0 or not 0 < delta < 1:
        raise InputError("need r >= 0, m >= 1, alpha > 0, delta in (0, 1)")
    T_max = iteration_bound(r, m, alpha)
    delta0 = delta if r == 0 else min(delta, m * alpha**2 * delta / (4 * r))
    N = hoeffding_sample_size(W_size, alpha, delta0)
    return SampleBudget(T_max, N, T_max * N, delta0)


def weighted_mc(gamma: TabularPredictor, W: Sequence[WeightFunction],
                params: CalibrationParams,
                data: FiniteDistribution | Callable[[int], SampleBatch]):
    """Post-process ``gamma`` until no weight function in ``W`` is violated.

    ``W`` must have been built from this same ``gamma``. In exact mode
    ``data`` is the distribution and the oracle uses exact expectations.
    In empirical mode ``data`` is either the distribution (a fresh batch of
    ``samples_per_call`` draws per oracle call) or a callable mapping the
    call index to a ``SampleBatch``.

    Returns the calibrated predictor and its trace. Exact mode raises
    ``ConvergenceError`` if the iteration cap is reached.
    """
    alpha, eta = params.alpha, params.step
    dist = data if isinstance(data, FiniteDistribution) else None
    if params.mode == "exact" and dist is None:
        raise InputError("exact mode needs a FiniteDistribution")
    d = _scale(W, gamma.m, params.scale)

    table = np.array(gamma.table, dtype=np.float64)
    trace = CalibrationTrace()
    phi = mse_potential(dist, gamma) if dist is not None else math.nan
    trace.initial_potential = phi

    max_iter = params.max_iter
    if max_iter is None:
        if dist is None:
            raise InputError("max_iter is required when the distribution is unknown")
        bound = iteration_bound(phi, d, alpha)
        max_iter = bound if params.mode == "exact" else 2 * bound

    def draw(call: int) -> SampleBatch:
        if dist is not None:
            return sample(dist, substream(params.seed, call), params.samples_per_call)
        return data(call)

    t = 0
    while True:
        current = TabularPredictor(table)
        if params.mode == "exact":
            verdict = check_exact(dist, current, W, alpha, d)
        else:
            batch = draw(trace.check_calls)
            trace.samples_used += len(batch)
            verdict = check_empirical(batch, current, W, alpha, d)
        trace.check_calls += 1
        if verdict is None:
            break
        if t >= max_iter:
            trace.status = ITERATION_CAP
            break
        step = W[verdict.index].matrix(table)
        trace.rows.append(TraceRow(t, verdict.weight_id, verdict.sign, phi, verdict.z))
        table = project_box(table + eta * verdict.sign * step)
        if dist is not None:
            phi = float(dist.probs @ ((table - dist.means) ** 2).sum(axis=1))
        t += 1

    trace.iterations = t
    trace.final_potential = phi
    result = TabularPredictor(table)
    if trace.status == ITERATION_CAP and params.mode == "exact":
        raise ConvergenceError(
            f"exact calibration still violated after {max_iter} iterations", trace
        )
    return result, trace
