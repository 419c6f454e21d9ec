"""
Exact linear prediction for stationary Gaussian increments.

The Durbin-Levinson recursion turns the autocovariance of the increments
into one-step predictor coefficients phi_{k, j} and innovation variances v_k.
Predictions over several future steps are chained: each predicted increment
is fed back into the buffer of known increments, which gives the exact
conditional mean of the sum by the tower property.
"""

import logging
from functools import lru_cache
from typing import Callable, Iterable, List, Optional

import numpy as np

from grid_paths import StructuralError, fgn_autocovariance

logger = logging.getLogger(__name__)


def durbin_levinson(gamma: np.ndarray):
    """
    Args:
        gamma: autocovariances gamma(0..K)

    Returns:
        (coefficients, variances): coefficients[k] holds phi_{k, k..1} (reversed,
        so that coefficients[k] @ past[:k] predicts increment k + 1), for k = 0..K-1;
        variances[k] = v_k.
    """
    size = gamma.size - 1
    coefficients: List[np.ndarray] = [np.zeros(0)]
    variances = np.empty(size)
    variances[0] = gamma[0]
    phi = np.zeros(0)
    for k in range(1, size):
        kappa = (gamma[k] - phi @ gamma[k - 1:0:-1]) / variances[k - 1]
        phi = np.append(phi - kappa * phi[::-1], kappa)
        variances[k] = variances[k - 1] * (1.0 - kappa ** 2)
        coefficients.append(phi[::-1].copy())
    return coefficients, variances


class GaussianPredictor:
    """
    Conditional means and variances of block sums of a stationary Gaussian
    increment sequence given all earlier increments.

    Args:
        autocovariance: k -> gamma(k) of the unit-scale increments
        n_steps: number of increments on the grid
        variance_scale: factor converting unit-scale variances into path units
    """

    def __init__(self, autocovariance: Callable[[np.ndarray], np.ndarray], n_steps: int, variance_scale: float = 1.0):
        self.n_steps = n_steps
        self.variance_scale = variance_scale
        gamma = np.asarray(autocovariance(np.arange(n_steps + 1)), dtype=np.float64)
        self.coefficients, self.variances = durbin_levinson(gamma)

    @classmethod
    def for_fbm(cls, hurst: float, n_steps: int) -> "GaussianPredictor":
        return _fbm_predictor(float(hurst), int(n_steps))

    def block_drift(self, increments: np.ndarray, stride: int, blocks: Optional[Iterable[int]] = None) -> np.ndarray:
        """
        E[sum of increments in block b | increments before block b] per path.

        Args:
            increments: (N, K) increments in path units
            stride: increments per block
            blocks: block indices to evaluate (default: all)

        Returns:
            (N, len(blocks)) conditional means
        """
        n_paths, size = increments.shape
        if size != self.n_steps or size % stride:
            raise StructuralError(f"{size} increments do not split into blocks of {stride}")
        blocks = list(range(size // stride)) if blocks is None else list(blocks)
        buffer = np.ascontiguousarray(increments.T)
        result = np.zeros((n_paths, len(blocks)))
        for column, block in enumerate(blocks):
            start = block * stride
            for k in range(start, start + stride):
                if k == 0:
                    predicted = np.zeros(n_paths)
                else:
                    predicted = self.coefficients[k] @ buffer[:k]
                buffer[k] = predicted
                result[:, column] += predicted
            buffer[start:start + stride] = increments[:, start:start + stride].T
        return result

    def block_variance(self, stride: int) -> np.ndarray:
        """
        Var(sum of block b | increments before block b) in path units, per block.

        The prediction error of the block sum is a combination of the innovations
        of the block; their weights come from a backward pass over the chained
        predictor.
        """
        variances = np.empty(self.n_steps // stride)
        for block in range(variances.size):
            start = block * stride
            weights = np.ones(stride)
            for offset in range(stride - 1, 0, -1):
                # the predictor for step start+offset reaches back `offset` steps into the block
                phi = self.coefficients[start + offset]
                weights[:offset] += weights[offset] * phi[start:start + offset]
            variances[block] = weights ** 2 @ self.variances[start:start + stride]
        return variances * self.variance_scale


@lru_cache(maxsize=4)
def _fbm_predictor(hurst: float, n_steps: int) -> GaussianPredictor:
    logger.info(f"Building fBm predictor (H={hurst}, {n_steps} steps)...")
    return GaussianPredictor(
        lambda k: fgn_autocovariance(hurst, k), n_steps, variance_scale=(1.0 / n_steps) ** (2 * hurst)
    )
