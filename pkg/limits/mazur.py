"""
Mazur-type convex combinations of the indicators 1{rho_k = inf} and the
stopping time rho accumulated from them.
"""

import logging
from typing import List, Sequence

import numpy as np

from grid_paths import DomainError, InvariantViolation, StoppingTimeVector, StructuralError, require_same_grid

try:
    from limits.min_norm import ConvexWeights, min_norm_convex
except ImportError:
    from .min_norm import ConvexWeights, min_norm_convex

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 8


def mazur_sequence(samples: Sequence[np.ndarray], window: int = DEFAULT_WINDOW) -> List[ConvexWeights]:
    """
    For every n, min-norm weights over the tail window X_n..X_{N_n},
    N_n = min(n + window, len) - 1, in the L2 norm of the empirical measure.

    When the window covers the whole tail the hulls shrink with n and the
    squared norms are non-decreasing; sliding windows carry no such order.
    """
    if window < 1:
        raise DomainError(f"window must be at least 1, got {window}")
    matrix = np.asarray([np.asarray(x, dtype=np.float64) for x in samples])
    if matrix.ndim != 2:
        raise StructuralError("samples must be equal-length vectors")
    scaled = matrix / np.sqrt(matrix.shape[1])
    sequence = []
    for n in range(matrix.shape[0]):
        stop = min(n + window, matrix.shape[0])
        sequence.append(min_norm_convex(scaled[n:stop], start=n))
    logger.debug("Mazur norms: " + ", ".join(f"{w.squared_norm:.4f}" for w in sequence))
    return sequence


def mazur_combinations(samples: Sequence[np.ndarray], sequence: Sequence[ConvexWeights]) -> np.ndarray:
    """Y_n = sum_k mu^n_k X_k for every n, as rows."""
    matrix = np.asarray(samples, dtype=np.float64)
    return np.stack([w.combine(matrix[w.start:w.end + 1]) for w in sequence])


def _window_times(rhos: Sequence[StoppingTimeVector], weights: ConvexWeights) -> np.ndarray:
    if weights.end >= len(rhos):
        raise StructuralError(f"weights reach index {weights.end} but only {len(rhos)} stopping times exist")
    return np.stack([rho.indices for rho in rhos[weights.start:weights.end + 1]], axis=1)


def _combo_at(indices: np.ndarray, weights: np.ndarray, at: np.ndarray) -> np.ndarray:
    """sum_k mu_k 1{at <= rho_k} per path; `at` may be the infinity sentinel."""
    return (indices >= at[:, None]).astype(np.float64) @ weights


def accumulation_stopping_time(
    rhos: Sequence[StoppingTimeVector],
    sequence: Sequence[ConvexWeights],
    factor: float = 2.0,
) -> StoppingTimeVector:
    """
    rho = largest grid time t such that, for every window n, the combination
    sum_k mu^n_k 1_[0, rho_k](t) is at least 1/factor; rho = inf when the
    combinations also keep sum_k mu^n_k 1{rho_k = inf} >= 1/factor.

    The domination 1_[0, rho] <= factor * sum_k mu^n_k 1_[0, rho_k] is then
    checked on every path for every n.
    """
    if not rhos:
        raise StructuralError("no stopping times to accumulate")
    if factor <= 1:
        raise DomainError(f"domination factor must exceed 1, got {factor}")
    grid = rhos[0].grid
    for rho in rhos[1:]:
        require_same_grid(grid, rho.grid)
    threshold = 1.0 / factor
    n_paths = rhos[0].n_paths
    last_index = grid.n_steps
    infinity = np.full(n_paths, grid.infinity)

    result = np.full(n_paths, last_index, dtype=np.int64)
    stays_infinite = np.ones(n_paths, dtype=bool)
    for weights in sequence:
        indices = _window_times(rhos, weights)
        capped = np.minimum(indices, last_index)
        # the combination only drops right after some rho_k, so the last time it
        # is above the threshold is one of the (capped) rho_k
        above = np.stack(
            [_combo_at(indices, weights.weights, capped[:, j]) >= threshold for j in range(capped.shape[1])],
            axis=1,
        )
        last = np.max(np.where(above, capped, -1), axis=1)
        result = np.minimum(result, last)
        stays_infinite &= _combo_at(indices, weights.weights, infinity) >= threshold

    result = np.where((result == last_index) & stays_infinite, grid.infinity, result)
    rho = StoppingTimeVector(grid, result)
    _check_domination(rho, rhos, sequence, factor)
    logger.info(f"accumulated rho: {rho.fraction_infinite:.3f} of paths never stopped")
    return rho


def _check_domination(
    rho: StoppingTimeVector, rhos: Sequence[StoppingTimeVector], sequence: Sequence[ConvexWeights], factor: float
) -> None:
    """
    1_[0, rho](t) <= factor * sum_k mu_k 1_[0, rho_k](t) at every grid t and at inf.

    Both sides are non-increasing step functions of t, so on [0, rho] the right
    side is smallest at rho itself; beyond rho the left side vanishes.
    """
    for weights in sequence:
        indices = _window_times(rhos, weights)
        at = np.minimum(rho.indices, rho.grid.n_steps)
        worst = factor * _combo_at(indices, weights.weights, at)
        at_infinity = factor * _combo_at(indices, weights.weights, np.full(rho.n_paths, rho.grid.infinity))
        violated = (worst < 1.0 - 1e-12) | (rho.is_infinite & (at_infinity < 1.0 - 1e-12))
        if violated.any():
            raise InvariantViolation(
                f"accumulated stopping time violates the factor-{factor} domination on "
                f"{int(violated.sum())} paths (window starting at {weights.start})"
            )
