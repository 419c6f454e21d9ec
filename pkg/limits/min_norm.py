"""
Minimum-norm point of the convex hull of finitely many vectors (Wolfe's
algorithm, run on the Gram matrix so the dimension of the vectors only
enters once).
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from grid_paths import ConvergenceWarning, DomainError, InvariantViolation

logger = logging.getLogger(__name__)

CONVERGED = "converged"
INCONCLUSIVE = "inconclusive"

SIMPLEX_TOLERANCE = 1e-12


@dataclass
class ConvexWeights:
    """
    Attributes:
        weights: mu_start..mu_end, non-negative, summing to one
        start: index of the first vector of the window
        end: index of the last vector of the window (inclusive)
        squared_norm: |sum_k mu_k v_k|^2
        gap: Frank-Wolfe duality gap, an upper bound on squared_norm - optimum
        status: "converged" or "inconclusive"
        iterations: major cycles used
    """

    weights: np.ndarray
    start: int = 0
    end: int = 0
    squared_norm: float = 0.0
    gap: float = 0.0
    status: str = CONVERGED
    iterations: int = 0

    def combine(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64).T @ self.weights

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "weights": self.weights.tolist(),
            "squared_norm": self.squared_norm,
            "gap": self.gap,
            "status": self.status,
        }


def _affine_minimizer(gram: np.ndarray) -> np.ndarray:
    """Minimiser of a^T G a subject to sum(a) = 1, from the KKT system."""
    k = gram.shape[0]
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = gram
    system[:k, k] = 1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    solution = np.linalg.lstsq(system, rhs, rcond=None)[0]
    return solution[:k]


def check_simplex(weights: np.ndarray) -> None:
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise InvariantViolation(f"weights {weights} are not a point of the simplex")


def min_norm_convex(
    vectors: Sequence[np.ndarray],
    tolerance: float = 1e-12,
    max_iterations: int = 1000,
    start: int = 0,
) -> ConvexWeights:
    """
    Weights mu on the simplex minimising |sum_k mu_k v_k|.

    Args:
        vectors: k equal-length vectors
        tolerance: stop when the duality gap falls below tolerance * max |v_k|^2
        max_iterations: cap on major cycles; hitting it gives status "inconclusive"
        start: window offset recorded in the result

    Returns:
        ConvexWeights
    """
    matrix = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if matrix.shape[0] < 1 or matrix.size == 0:
        raise DomainError("need at least one non-empty vector")
    if not np.all(np.isfinite(matrix)):
        raise DomainError("vectors must be finite")
    gram = matrix @ matrix.T
    k = gram.shape[0]
    scale = max(float(np.max(np.diag(gram))), np.finfo(float).tiny)
    eps = 1e-14

    weights = np.zeros(k)
    first = int(np.argmin(np.diag(gram)))
    weights[first] = 1.0
    corral = [first]
    status = INCONCLUSIVE
    gap = np.inf
    iteration = 0

    for iteration in range(1, max_iterations + 1):
        gradient = gram @ weights
        squared = float(weights @ gradient)
        candidate = int(np.argmin(gradient))
        gap = 2.0 * (squared - float(gradient[candidate]))
        if gap <= tolerance * scale or candidate in corral:
            status = CONVERGED
            break
        corral.append(candidate)

        while True:
            index = np.array(corral)
            alpha = _affine_minimizer(gram[np.ix_(index, index)])
            if np.all(alpha > eps):
                weights = np.zeros(k)
                weights[index] = alpha
                break
            current = weights[index]
            negative = alpha <= eps
            theta = np.min(current[negative] / (current[negative] - alpha[negative]))
            mixed = current + theta * (alpha - current)
            mixed[mixed <= eps] = 0.0
            weights = np.zeros(k)
            weights[index] = mixed
            corral = [i for i in corral if weights[i] > 0]
            if len(corral) == 1:
                weights = np.zeros(k)
                weights[corral[0]] = 1.0
                break

    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    check_simplex(weights)
    squared = float(weights @ gram @ weights)
    if status != CONVERGED:
        warnings.warn(
            f"min-norm solver stopped after {max_iterations} cycles with gap {gap:.3g}", ConvergenceWarning
        )
        logger.warning(f"min-norm solver not converged (gap {gap:.3g})")
    return ConvexWeights(
        weights=weights,
        start=start,
        end=start + k - 1,
        squared_norm=squared,
        gap=max(float(gap), 0.0),
        status=status,
        iterations=iteration,
    )
