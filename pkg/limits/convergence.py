"""Ky Fan distance and finite Cauchy evidence for convergence in probability."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from scipy import stats

from grid_paths import DomainError, StructuralError

logger = logging.getLogger(__name__)

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

# share of the levels, from the top, that a verdict looks at
TAIL_FRACTION = 0.5


def ky_fan_distance(x: np.ndarray, y: np.ndarray) -> float:
    """E[min(1, |X - Y|)] under the empirical measure."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise StructuralError(f"samples of shapes {x.shape} and {y.shape}")
    return float(np.mean(np.minimum(1.0, np.abs(x - y))))


@dataclass
class ConvergenceReport:
    """
    Attributes:
        levels: levels of the samples, increasing
        distances: symmetric matrix of Ky Fan distances d(n, m)
        verdict: "convergent", "divergent" or "inconclusive"
        thresholds: cut-offs used for the verdict
        tail: levels that entered the verdict
    """

    levels: List[int]
    distances: np.ndarray
    verdict: str
    thresholds: Dict[str, float] = field(default_factory=dict)
    tail: List[int] = field(default_factory=list)

    def consecutive(self) -> np.ndarray:
        return np.diag(self.distances, k=1)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "levels": self.levels,
            "distances": self.distances.tolist(),
            "thresholds": self.thresholds,
            "tail": self.tail,
        }


def distance_matrix(samples: Sequence[np.ndarray]) -> np.ndarray:
    count = len(samples)
    distances = np.zeros((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            distances[i, j] = distances[j, i] = ky_fan_distance(samples[i], samples[j])
    return distances


def convergence_in_probability(
    levels: Sequence[int],
    samples: Sequence[np.ndarray],
    tau_conv: float = 0.02,
    tau_div: float = 0.2,
    tail_fraction: float = TAIL_FRACTION,
) -> ConvergenceReport:
    """
    Cauchy verdict for a level-indexed sequence of samples on one ensemble.

    convergent: every pairwise distance among the tail levels is below tau_conv.
    divergent: every consecutive distance among the tail levels is at least tau_div.
    The tail is the last ceil(tail_fraction * L) levels (the top half by default), and at least two.
    """
    if len(levels) != len(samples):
        raise StructuralError(f"{len(levels)} levels for {len(samples)} samples")
    if len(levels) < 3:
        raise DomainError(f"a Cauchy verdict needs at least 3 levels, got {len(levels)}")
    order = np.argsort(levels)
    levels = [int(levels[i]) for i in order]
    samples = [samples[i] for i in order]
    distances = distance_matrix(samples)

    size = len(tail_levels(levels, tail_fraction, 2))
    tail = slice(len(levels) - size, len(levels))
    tail_block = distances[tail, tail]
    tail_steps = np.diag(tail_block, k=1)
    if np.max(tail_block) < tau_conv:
        verdict = CONVERGENT
    elif np.all(tail_steps >= tau_div):
        verdict = DIVERGENT
    else:
        verdict = INCONCLUSIVE
    logger.debug(f"Cauchy verdict over levels {levels}: {verdict} (tail steps {tail_steps})")
    return ConvergenceReport(
        levels=levels,
        distances=distances,
        verdict=verdict,
        thresholds={"tau_conv": tau_conv, "tau_div": tau_div, "tail_fraction": tail_fraction},
        tail=levels[tail],
    )


def tail_levels(levels: Sequence[int], fraction: float, minimum: int) -> List[int]:
    """The last ceil(fraction * L) of the sorted levels, and at least `minimum` of them."""
    levels = sorted(int(n) for n in levels)
    size = min(len(levels), max(minimum, math.ceil(fraction * len(levels))))
    return levels[len(levels) - size:]


def growth_fit(levels: Sequence[int], values: Sequence[float], fraction: float = TAIL_FRACTION):
    """
    Least-squares slope and r^2 of log2(values) against the level, over the
    top `fraction` of the levels (at least three when there are three).

    Returns:
        (slope, r_squared, fitted levels)
    """
    pairs = dict(zip((int(n) for n in levels), values))
    if len(pairs) < 2:
        raise DomainError(f"a growth fit needs at least 2 levels, got {len(pairs)}")
    fitted = tail_levels(list(pairs), fraction, 3)
    logs = np.log2(np.maximum([pairs[n] for n in fitted], np.finfo(float).tiny))
    fit = stats.linregress(fitted, logs)
    return float(fit.slope), float(fit.rvalue ** 2), fitted
