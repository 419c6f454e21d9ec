"""
Discrete Doob decomposition S = M + A along a grid pi, the Rao split
S = Y - Z into two submartingales, and the telescoping paste of
decompositions of stopped processes.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from grid_paths import DyadicGrid, PathEnsemble, StoppingTimeVector, StructuralError, require_same_grid, stop

try:
    from variation.oracles import ConditionalDriftOracle, drift_matrix
except ImportError:
    from .oracles import ConditionalDriftOracle, drift_matrix

logger = logging.getLogger(__name__)


def accumulate_on(ensemble: PathEnsemble, coarse: DyadicGrid, increments: np.ndarray) -> np.ndarray:
    """
    Predictable process on the fine grid: the sum of increments[:, i] over the
    intervals of pi that have ended by t.
    """
    stride = ensemble.grid.stride(coarse)
    partial = np.zeros((ensemble.n_paths, coarse.n_points))
    np.cumsum(increments, axis=1, out=partial[:, 1:])
    return partial[:, np.arange(ensemble.grid.n_points) // stride]


@dataclass(frozen=True, eq=False)
class DoobDecomposition:
    """
    S = M + A along pi with A_0 = 0 and A predictable.

    Attributes:
        martingale: M on the grid of S
        compensator: A on the grid of S, constant between points of pi
        drift: (N, |pi| - 1) conditional drifts used for A
        source: the decomposed ensemble
        oracle: oracle that produced the drifts
        coarse: the grid pi
    """

    martingale: PathEnsemble
    compensator: PathEnsemble
    drift: np.ndarray
    source: PathEnsemble
    oracle: ConditionalDriftOracle
    coarse: DyadicGrid

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.martingale.values + self.compensator.values - self.source.values)))


@dataclass(frozen=True, eq=False)
class RaoDecomposition:
    """S = Y - Z with Y = M + A+ and Z = A- (A+ and A- accumulate drift+ and drift-)."""

    upper: PathEnsemble
    lower: PathEnsemble
    doob: DoobDecomposition

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.upper.values - self.lower.values - self.doob.source.values)))


def doob_decompose(
    ensemble: PathEnsemble, oracle: ConditionalDriftOracle, coarse: Optional[DyadicGrid] = None
) -> DoobDecomposition:
    coarse = ensemble.grid if coarse is None else coarse
    drifts = drift_matrix(ensemble, oracle, coarse)
    compensator = accumulate_on(ensemble, coarse, drifts)
    return DoobDecomposition(
        martingale=ensemble.derive(ensemble.values - compensator, label="M"),
        compensator=ensemble.derive(compensator, label="A"),
        drift=drifts,
        source=ensemble,
        oracle=oracle,
        coarse=coarse,
    )


def rao_decompose(
    ensemble: PathEnsemble, oracle: ConditionalDriftOracle, coarse: Optional[DyadicGrid] = None
) -> RaoDecomposition:
    doob = doob_decompose(ensemble, oracle, coarse)
    positive = accumulate_on(ensemble, doob.coarse, np.maximum(doob.drift, 0.0))
    negative = accumulate_on(ensemble, doob.coarse, np.maximum(-doob.drift, 0.0))
    return RaoDecomposition(
        upper=ensemble.derive(doob.martingale.values + positive, label="Y"),
        lower=ensemble.derive(negative, label="Z"),
        doob=doob,
    )


def martingale_certificate(decomposition: DoobDecomposition) -> np.ndarray:
    """
    Per path, max_i |E[M_{t_i+1} - M_{t_i} | F_{t_i}]| = max_i |drift_i - (A_{t_i+1} - A_{t_i})|,
    with the drifts recomputed by the oracle.
    """
    drifts = drift_matrix(decomposition.source, decomposition.oracle, decomposition.coarse)
    steps = np.diff(decomposition.compensator.on(decomposition.coarse), axis=1)
    if drifts.shape[1] == 0:
        return np.zeros(drifts.shape[0])
    return np.max(np.abs(drifts - steps), axis=1)


def submartingale_certificates(rao: RaoDecomposition) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per path, the smallest conditional increment along pi of Y and of Z.

    E[dY | F] = (drift - dA) + dA+ and E[dZ | F] = dA-; both are >= 0 up to rounding.
    """
    doob = rao.doob
    coarse = doob.coarse
    drifts = drift_matrix(doob.source, doob.oracle, coarse)
    if drifts.shape[1] == 0:
        zeros = np.zeros(drifts.shape[0])
        return zeros, zeros
    compensator_steps = np.diff(doob.compensator.on(coarse), axis=1)
    positive_steps = np.diff(rao.upper.on(coarse) - doob.martingale.on(coarse), axis=1)
    lower_steps = np.diff(rao.lower.on(coarse), axis=1)
    upper = np.min(drifts - compensator_steps + positive_steps, axis=1)
    return upper, np.min(lower_steps, axis=1)


def telescope_paste(
    pieces: Sequence[Tuple[StoppingTimeVector, DoobDecomposition]],
) -> DoobDecomposition:
    """
    Paste decompositions of S^{sigma_1}, S^{sigma_2}, ... into one decomposition
    of S^{sup sigma_k}: on (sigma_k-1, sigma_k] the k-th piece is used,

        X = X^1_{. ^ sigma_1} + sum_k (X^k_{. ^ sigma_k} - X^k_{. ^ sigma_k-1})   for X in {M, A}.
    """
    if not pieces:
        raise StructuralError("nothing to paste")
    times = [sigma for sigma, _ in pieces]
    for sigma in times[1:]:
        require_same_grid(times[0].grid, sigma.grid)
    for earlier, later in zip(times, times[1:]):
        if np.any(earlier.indices > later.indices):
            raise StructuralError("paste times must be non-decreasing on every path")
    coarse = pieces[0][1].coarse
    if any(piece.coarse != coarse for _, piece in pieces):
        raise StructuralError("pieces decompose along different grids")

    def paste(component: str) -> np.ndarray:
        first_sigma, first = pieces[0]
        total = stop(getattr(first, component), first_sigma).values
        for (previous, _), (sigma, piece) in zip(pieces, pieces[1:]):
            part = getattr(piece, component)
            total = total + (stop(part, sigma).values - stop(part, previous).values)
        return total

    last_sigma, last = pieces[-1]
    source = stop(last.source, last_sigma)
    logger.debug(f"pasted {len(pieces)} pieces, {last_sigma.fraction_infinite:.3f} of paths fully covered")
    return DoobDecomposition(
        martingale=source.derive(paste("martingale"), label="M"),
        compensator=source.derive(paste("compensator"), label="A"),
        drift=drift_matrix(source, last.oracle, coarse),
        source=source,
        oracle=last.oracle,
        coarse=coarse,
    )
