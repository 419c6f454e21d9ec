"""
Conditional-drift oracles: E[S_{t_i+1} - S_{t_i} | history up to t_i] along a grid.

ANALYTIC and GAUSSIAN_LINEAR oracles are exact and are tied to the model that
declares them; KERNEL_REGRESSION estimates the drift across paths and is only
valid for Markov models. On a stopped ensemble every drift is gated by
1{t_i < rho}; deterministic models read the drift from the stopped values.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from grid_paths import (
    BoundedTruncation,
    BrownianMotion,
    CompensatedPoisson,
    DeterministicFunction,
    DomainError,
    DyadicGrid,
    FractionalBrownianMotion,
    OrnsteinUhlenbeck,
    PathEnsemble,
    ProcessModel,
    SquaredBrownian,
)

try:
    from variation.prediction import GaussianPredictor
except ImportError:
    from .prediction import GaussianPredictor

logger = logging.getLogger(__name__)

KERNEL_EVALUATION_POINTS = 128


class OracleKind(Enum):
    ANALYTIC = "analytic"
    GAUSSIAN_LINEAR = "gaussian-linear"
    KERNEL_REGRESSION = "kernel-regression"


@dataclass(frozen=True)
class ConditionalDriftOracle:
    """
    Attributes:
        kind: how conditional expectations are obtained
        bandwidth: kernel bandwidth as a multiple of the cross-path std (kernel regression only)
    """

    kind: OracleKind
    bandwidth: float = 0.2

    @property
    def exact(self) -> bool:
        return self.kind is not OracleKind.KERNEL_REGRESSION

    @classmethod
    def for_model(cls, model: ProcessModel, kind: str = "auto", bandwidth: float = 0.2) -> "ConditionalDriftOracle":
        """Pick the model's exact oracle for kind "auto" (kernel regression when there is none)."""
        if kind == "auto":
            if model.has_exact_drift_oracle:
                return cls(OracleKind(model.exact_oracle))
            return cls(OracleKind.KERNEL_REGRESSION, bandwidth)
        oracle = cls(OracleKind(kind), bandwidth)
        oracle.check(model)
        return oracle

    def check(self, model: ProcessModel) -> None:
        if self.kind is OracleKind.KERNEL_REGRESSION:
            if not model.is_markov:
                raise DomainError(f"kernel regression needs a Markov model; {model!r} is not")
            if self.bandwidth <= 0:
                raise DomainError(f"bandwidth must be positive, got {self.bandwidth}")
        elif model.exact_oracle != self.kind.value:
            raise DomainError(f"{model!r} has no {self.kind.value} oracle")


def clipped_gaussian_mean(mean: np.ndarray, std: np.ndarray, bound: float) -> np.ndarray:
    """E[clip(Y, -b, b)] for Y ~ N(mean, std**2); std may be zero."""
    mean, std = np.broadcast_arrays(np.asarray(mean, dtype=np.float64), np.asarray(std, dtype=np.float64))
    result = np.clip(mean, -bound, bound)
    random = std > 0
    if random.any():
        m, s = mean[random], std[random]
        alpha = (-bound - m) / s
        beta = (bound - m) / s
        result = result.copy()
        result[random] = (
            -bound * stats.norm.cdf(alpha)
            + bound * stats.norm.sf(beta)
            + m * (stats.norm.cdf(beta) - stats.norm.cdf(alpha))
            + s * (stats.norm.pdf(alpha) - stats.norm.pdf(beta))
        )
    return result


def clipped_poisson_mean(start: np.ndarray, mean_jumps: float, bound: float) -> np.ndarray:
    """E[clip(x + K - mean_jumps, -b, b)] for K ~ Poisson(mean_jumps)."""
    start = np.asarray(start, dtype=np.float64)
    if mean_jumps == 0:
        return np.clip(start, -bound, bound)
    # beyond `top` jumps every path sits at the upper bound
    top = int(np.ceil(max(0.0, float(np.max(bound - start)) + mean_jumps))) + 1
    counts = np.arange(top + 1)
    weights = stats.poisson.pmf(counts, mean_jumps)
    levels = np.clip(start[:, None] + counts[None, :] - mean_jumps, -bound, bound)
    return levels @ weights + bound * stats.poisson.sf(top, mean_jumps)


def _inner_moments(model: ProcessModel, ensemble: PathEnsemble, coarse: DyadicGrid, blocks: np.ndarray):
    """Conditional mean and std of the inner path at t_i+1 given the history up to t_i."""
    stride = ensemble.grid.stride(coarse)
    h = stride * ensemble.grid.dt
    start = ensemble.history[:, blocks * stride]
    if isinstance(model, BrownianMotion):
        return start + model.drift * h, np.full(start.shape, model.volatility * np.sqrt(h))
    if isinstance(model, OrnsteinUhlenbeck):
        factor, variance = model.step_moments(h)
        return factor * start, np.full(start.shape, np.sqrt(variance))
    if isinstance(model, FractionalBrownianMotion):
        predictor = GaussianPredictor.for_fbm(model.hurst, ensemble.grid.n_steps)
        drift = predictor.block_drift(np.diff(ensemble.history, axis=1), stride, blocks)
        variance = predictor.block_variance(stride)[blocks]
        return start + drift, np.broadcast_to(np.sqrt(variance), start.shape)
    raise DomainError(f"no Gaussian conditional law for {model!r}")


def _analytic_drift(ensemble: PathEnsemble, coarse: DyadicGrid, blocks: np.ndarray) -> np.ndarray:
    model = ensemble.model
    stride = ensemble.grid.stride(coarse)
    h = stride * ensemble.grid.dt
    shape = (ensemble.n_paths, blocks.size)
    if isinstance(model, BrownianMotion):
        return np.full(shape, model.drift * h)
    if isinstance(model, CompensatedPoisson):
        return np.zeros(shape)
    if isinstance(model, SquaredBrownian):
        return np.full(shape, h)
    if isinstance(model, OrnsteinUhlenbeck):
        factor, _ = model.step_moments(h)
        return (factor - 1.0) * ensemble.history[:, blocks * stride]
    if isinstance(model, DeterministicFunction):
        values = ensemble.values
        return values[:, (blocks + 1) * stride] - values[:, blocks * stride]
    if isinstance(model, BoundedTruncation):
        inner = model.inner
        start = ensemble.history[:, blocks * stride]
        if isinstance(inner, CompensatedPoisson):
            expected = np.column_stack(
                [clipped_poisson_mean(start[:, j], inner.rate * h, model.bound) for j in range(blocks.size)]
            ) if blocks.size else np.zeros(shape)
        else:
            mean, std = _inner_moments(inner, ensemble, coarse, blocks)
            expected = clipped_gaussian_mean(mean, std, model.bound)
        return expected - np.clip(start, -model.bound, model.bound)
    raise DomainError(f"no analytic drift for {model!r}")


def _gaussian_linear_drift(ensemble: PathEnsemble, coarse: DyadicGrid, blocks: np.ndarray) -> np.ndarray:
    model = ensemble.model
    if isinstance(model, BoundedTruncation):
        return _analytic_drift(ensemble, coarse, blocks)
    if not isinstance(model, FractionalBrownianMotion):
        raise DomainError(f"no Gaussian linear predictor for {model!r}")
    predictor = GaussianPredictor.for_fbm(model.hurst, ensemble.grid.n_steps)
    return predictor.block_drift(np.diff(ensemble.history, axis=1), ensemble.grid.stride(coarse), blocks)


def _kernel_drift(
    ensemble: PathEnsemble, coarse: DyadicGrid, blocks: np.ndarray, bandwidth: float
) -> np.ndarray:
    """Nadaraya-Watson regression of the increment on the current value, across live paths."""
    stride = ensemble.grid.stride(coarse)
    values = ensemble.values
    alive_until = ensemble.stopping if ensemble.stopping is not None else np.full(ensemble.n_paths, ensemble.grid.infinity)
    result = np.zeros((ensemble.n_paths, blocks.size))
    for column, block in enumerate(blocks):
        left, right = block * stride, (block + 1) * stride
        live = alive_until >= right
        if not live.any():
            continue
        x = values[live, left]
        y = values[live, right] - x
        spread = np.std(x)
        if spread == 0 or x.size < 2:
            result[:, column] = np.mean(y)
            continue
        width = bandwidth * spread
        points = np.linspace(x.min(), x.max(), KERNEL_EVALUATION_POINTS)
        kernel = stats.norm.pdf((points[:, None] - x[None, :]) / width)
        fitted = kernel @ y / kernel.sum(axis=1)
        result[:, column] = np.interp(values[:, left], points, fitted)
    return result


def drift_matrix(
    ensemble: PathEnsemble,
    oracle: ConditionalDriftOracle,
    coarse: Optional[DyadicGrid] = None,
    blocks: Optional[Sequence[int]] = None,
    gate: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Conditional drifts along `coarse` (default: the ensemble's own grid).

    Args:
        ensemble: paths, possibly stopped
        oracle: conditional expectation method
        coarse: sub-grid pi of the ensemble grid
        blocks: interval indices i of pi to evaluate (default: all)
        gate: extra fine-grid stopping indices; drift i is kept where t_i < gate

    Returns:
        (N, len(blocks)) matrix of E[S_{t_i+1} - S_{t_i} | F_{t_i}] 1{t_i < rho}
    """
    oracle.check(ensemble.model)
    coarse = ensemble.grid if coarse is None else coarse
    stride = ensemble.grid.stride(coarse)
    blocks = np.arange(coarse.n_steps) if blocks is None else np.asarray(blocks, dtype=np.int64)

    if oracle.kind is OracleKind.ANALYTIC:
        drifts = _analytic_drift(ensemble, coarse, blocks)
    elif oracle.kind is OracleKind.GAUSSIAN_LINEAR:
        drifts = _gaussian_linear_drift(ensemble, coarse, blocks)
    else:
        drifts = _kernel_drift(ensemble, coarse, blocks, oracle.bandwidth)

    # analytic deterministic drifts already come from the stopped values
    reads_values = oracle.kind is OracleKind.ANALYTIC and isinstance(ensemble.model, DeterministicFunction)
    own = None if reads_values else ensemble.stopping
    limits = [g for g in (own, gate) if g is not None]
    if limits:
        limit = np.minimum.reduce(limits)
        drifts = np.where((blocks * stride)[None, :] < limit[:, None], drifts, 0.0)
    return drifts


def conditional_drift(ensemble: PathEnsemble, oracle: ConditionalDriftOracle, i: int) -> np.ndarray:
    """E[S_{t_i+1} - S_{t_i} | history up to t_i] per path, on the ensemble's own grid."""
    return drift_matrix(ensemble, oracle, blocks=[i])[:, 0]
