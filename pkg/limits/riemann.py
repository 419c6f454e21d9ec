"""
Riemann-integrator test: do the dyadic Riemann sums of bounded continuous
adapted integrands converge in probability as the level grows?

Fixed integrands K (constants, the path itself, state functions f(t, S_t))
get a Cauchy verdict. Level-indexed witnesses get a boundedness verdict
instead: the affine interpolation of the lag-two sign coefficients of D_n is
continuous and adapted, and its Riemann sum on D_n is the lag-two sign
integral, which a Riemann integrator keeps bounded in probability.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from grid_paths import DomainError, PathEnsemble, make_grid
from integrands import lagged_sign_integrand, riemann_sum

try:
    from limits.convergence import (
        CONVERGENT, DIVERGENT, TAIL_FRACTION, ConvergenceReport, convergence_in_probability, growth_fit,
    )
except ImportError:
    from .convergence import (
        CONVERGENT, DIVERGENT, TAIL_FRACTION, ConvergenceReport, convergence_in_probability, growth_fit,
    )

logger = logging.getLogger(__name__)

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"

BOUNDED = "bounded"
UNBOUNDED = "unbounded"

StateFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
Witness = Callable[[PathEnsemble, int], PathEnsemble]


def state_function_integrand(ensemble: PathEnsemble, function: StateFunction, label: str = "K") -> PathEnsemble:
    """K_t = f(t, S_t) tabulated on the ensemble grid."""
    values = function(ensemble.grid.times[None, :], ensemble.values)
    return ensemble.derive(np.broadcast_to(values, ensemble.values.shape), label=label)


STATE_FUNCTIONS: Dict[str, StateFunction] = {
    "one": lambda t, x: np.ones_like(x),
    "path": lambda t, x: x,
    "exp_neg_square": lambda t, x: np.exp(-x ** 2),
    "cos_time": lambda t, x: np.cos(2 * np.pi * t) * np.ones_like(x),
}


def interpolated_sign_witness(ensemble: PathEnsemble, level: int) -> PathEnsemble:
    """
    The continuous adapted K^n with K^n(i/2^n) = sign(S_{(i-1)/2^n} - S_{(i-2)/2^n}),
    K^n(1) = 0, affine in between.
    """
    coefficients = lagged_sign_integrand(ensemble, level, 2).coefficients
    nodes = np.zeros((ensemble.n_paths, 2 ** level + 1))
    nodes[:, :-1] = coefficients
    stride = ensemble.grid.stride(make_grid(level))
    fine = np.arange(ensemble.grid.n_points)
    left = np.minimum(fine // stride, 2 ** level - 1)
    weight = (fine - left * stride) / stride
    values = (1.0 - weight) * nodes[:, left] + weight * nodes[:, left + 1]
    return ensemble.derive(values, label=f"K{level}")


@dataclass
class RiemannReport:
    """
    Attributes:
        levels: levels of every sum, increasing
        reports: Cauchy report per fixed integrand
        witnesses: per level-indexed witness, {"exponent", "verdict"} of the
            log2-growth of the median |sum| over the top levels
        verdict: "yes", "no" or "inconclusive" (is S a Riemann integrator?)
    """

    levels: List[int] = field(default_factory=list)
    reports: Dict[str, ConvergenceReport] = field(default_factory=dict)
    witnesses: Dict[str, dict] = field(default_factory=dict)
    verdict: str = INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "levels": self.levels,
            "integrands": {name: report.to_dict() for name, report in self.reports.items()},
            "witnesses": self.witnesses,
        }


def default_family(ensemble: PathEnsemble) -> Dict[str, PathEnsemble]:
    return {name: state_function_integrand(ensemble, function, name) for name, function in STATE_FUNCTIONS.items()}


def default_witnesses() -> Dict[str, Witness]:
    return {"interpolated_sign": interpolated_sign_witness}


def riemann_integrator_test(
    ensemble: PathEnsemble,
    levels: Sequence[int],
    family: Optional[Dict[str, PathEnsemble]] = None,
    witnesses: Optional[Dict[str, Witness]] = None,
    tau_conv: float = 0.02,
    tau_div: float = 0.2,
    tail_fraction: float = TAIL_FRACTION,
    bounded_exponent: float = 0.05,
    unbounded_exponent: float = 0.15,
) -> RiemannReport:
    """
    Cauchy test of riemann_sum(S, K, n) across levels for every fixed K, and a
    growth test of riemann_sum(S, K^n, n) for every witness K^n.

    The aggregate is "no" when some fixed K diverges or some witness grows at
    least like 2^(unbounded_exponent n), "yes" when every fixed K converges and
    every witness grows at most like 2^(bounded_exponent n). Both the Cauchy
    tail and the growth fit use the top `tail_fraction` of the levels.
    """
    levels = sorted(int(n) for n in levels)
    family = default_family(ensemble) if family is None else family
    witnesses = default_witnesses() if witnesses is None else witnesses
    if not family and not witnesses:
        raise DomainError("empty integrand family")

    report = RiemannReport(levels=levels)
    for name, integrand in family.items():
        samples = [riemann_sum(ensemble, integrand, n) for n in levels]
        report.reports[name] = convergence_in_probability(levels, samples, tau_conv, tau_div, tail_fraction)
        logger.info(f"Riemann sums of {name}: {report.reports[name].verdict}")

    for name, witness in witnesses.items():
        medians = [
            max(float(np.median(np.abs(riemann_sum(ensemble, witness(ensemble, n), n)))), np.finfo(float).tiny)
            for n in levels
        ]
        slope, _, fit_levels = growth_fit(levels, medians, tail_fraction)
        if slope >= unbounded_exponent:
            status = UNBOUNDED
        elif slope <= bounded_exponent:
            status = BOUNDED
        else:
            status = INCONCLUSIVE
        report.witnesses[name] = {"exponent": slope, "verdict": status, "medians": medians, "fit_levels": fit_levels}
        logger.info(f"Riemann sums of witness {name}: growth exponent {slope:.3f} ({status})")

    cauchy = [r.verdict for r in report.reports.values()]
    growth = [w["verdict"] for w in report.witnesses.values()]
    if DIVERGENT in cauchy or UNBOUNDED in growth:
        report.verdict = NO
    elif all(v == CONVERGENT for v in cauchy) and all(v == BOUNDED for v in growth):
        report.verdict = YES
    else:
        report.verdict = INCONCLUSIVE
    return report
