"""
The adversarial sign integrand H^n = sign(drift) and the stopping time rho_n
that halts H^n.S once it climbs to C - 2 sup|S|.
"""

import logging

import numpy as np

from grid_paths import InvariantViolation, PathEnsemble, StoppingTimeVector, at_least, first_passage, make_grid
from integrands import LAG_ZERO, ElementaryIntegrand, integral_process

try:
    from variation.oracles import ConditionalDriftOracle, drift_matrix
except ImportError:
    from .oracles import ConditionalDriftOracle, drift_matrix

logger = logging.getLogger(__name__)


def sign_integrand(ensemble: PathEnsemble, oracle: ConditionalDriftOracle, level: int) -> ElementaryIntegrand:
    """H^i = sign(E[S_{(i+1)/2^n} - S_{i/2^n} | F_{i/2^n}]), with sign(0) = 0."""
    drifts = drift_matrix(ensemble, oracle, make_grid(level))
    return ElementaryIntegrand(level, np.sign(drifts), LAG_ZERO, 1.0)


def bounded_variation_stopping(
    ensemble: PathEnsemble,
    integrand: ElementaryIntegrand,
    bound: float,
    sup_bound: float,
    declared: bool = True,
) -> StoppingTimeVector:
    """
    rho_n = first D_n time with (H.S)_t >= C - 2 sup|S|, else infinity.

    Args:
        ensemble: paths of S
        integrand: H with |H| <= 1
        bound: the constant C
        sup_bound: bound on |S|
        declared: whether sup_bound is a true bound (the jump check is then a hard postcondition)
    """
    threshold = bound - 2.0 * sup_bound
    process = integral_process(ensemble, integrand)
    rho = first_passage(process, at_least(threshold), on=make_grid(integrand.level))

    finite = ~rho.is_infinite
    reached = process.values[finite, rho.indices[finite]]
    if np.any(reached < threshold):
        raise InvariantViolation("stopped integral below the threshold on a stopped path")
    # one step of H.S moves by at most 2 sup|S|, so the stopped value cannot pass C
    overshoot = reached > bound
    if overshoot.any():
        message = f"{int(overshoot.sum())} stopped integrals exceed C = {bound}"
        if declared:
            raise InvariantViolation(message)
        logger.warning(message + " (sup bound is empirical)")
    logger.debug(f"rho_{integrand.level}: {rho.fraction_infinite:.3f} of paths never stopped")
    return rho
