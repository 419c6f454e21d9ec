"""
End-to-end localisation of a bounded good integrator:

1. probe the integrator to obtain C with P(sup |(H.S)| > C - 2 sup|S|) <= eps;
2. per level, stop the sign integral at rho_n once it climbs to C - 2 sup|S|;
3. accumulate the rho_n into one rho through min-norm convex combinations
   of the indicators 1{rho_n = inf};
4. check that S^rho has mean variation at most 2C + 6 sup|S| on every level.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from grid_paths import DomainError, PathEnsemble, StoppingTimeVector, make_grid, stop
from variation import (
    ConditionalDriftOracle,
    bounded_variation_stopping,
    mean_variation,
    mean_variation_stopped,
    sign_integrand,
)

try:
    from limits.mazur import DEFAULT_WINDOW, accumulation_stopping_time, mazur_sequence
    from limits.probe import FAMILY, ProbeResult, good_integrator_probe
except ImportError:
    from .mazur import DEFAULT_WINDOW, accumulation_stopping_time, mazur_sequence
    from .probe import FAMILY, ProbeResult, good_integrator_probe

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"


def proportion_stderr(p: float, size: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / size)


@dataclass
class PipelineLevel:
    level: int
    fraction_unstopped: float
    stopped_variation: float
    stopped_variation_stderr: float
    accumulated_variation: float
    accumulated_upper_bound: float
    accumulated_stderr: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PipelineReport:
    """
    Attributes:
        verdict: "PASS" when every checked bound holds
        constant: the C used to build every rho_n (probe.localization_constant)
        sup_bound: declared bound on |S|
        probe: the probe the constant came from
        levels: per-level quantities
        fraction_unstopped: empirical P(rho = inf) of the accumulated time
        failures: violated bounds, one dict per violation
    """

    verdict: str
    constant: float
    sup_bound: float
    epsilon: float
    probe: ProbeResult
    levels: List[PipelineLevel] = field(default_factory=list)
    fraction_unstopped: float = 1.0
    rho: Optional[StoppingTimeVector] = None
    failures: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "C": self.constant,
            "sup_bound": self.sup_bound,
            "epsilon": self.epsilon,
            "fraction_unstopped": self.fraction_unstopped,
            "levels": [entry.to_dict() for entry in self.levels],
            "probe": self.probe.to_dict(),
            "failures": self.failures,
        }


def theorem1_pipeline(
    ensemble: PathEnsemble,
    epsilon: float,
    levels: Sequence[int],
    oracle: Optional[ConditionalDriftOracle] = None,
    family: Sequence[str] = FAMILY,
    window: int = DEFAULT_WINDOW,
    factor: float = 2.0,
    probe: Optional[ProbeResult] = None,
    workers: int = 1,
) -> PipelineReport:
    """
    Run the localisation on a model with a declared sup bound and check
    P(rho_n = inf) >= 1 - eps, Var(S^rho_n, D_n) <= C, P(rho = inf) >= 1 - 3 eps
    and Var(S^rho, D_n) <= 2C + 6 sup|S|, each up to 3 standard errors.
    """
    sup_bound = ensemble.model.known_sup_bound
    if sup_bound is None:
        raise DomainError(f"{ensemble.model!r} declares no sup bound; localisation needs a bounded model")
    levels = sorted(int(n) for n in levels)
    oracle = oracle or ConditionalDriftOracle.for_model(ensemble.model)
    if probe is None:
        probe = good_integrator_probe(ensemble, levels, epsilon, family, oracle, workers=workers)
    constant = probe.localization_constant(sup_bound)
    size = ensemble.n_paths
    failures: List[dict] = []
    logger.info(f"localising with C = {constant:.6g} (sup bound {sup_bound})")

    rhos: List[StoppingTimeVector] = []
    per_level = []
    for level in levels:
        coarse = make_grid(level)
        integrand = sign_integrand(ensemble, oracle, level)
        rho_n = bounded_variation_stopping(ensemble, integrand, constant, sup_bound)
        rhos.append(rho_n)
        fraction = rho_n.fraction_infinite
        floor = 1.0 - epsilon - 3.0 * proportion_stderr(fraction, size)
        if fraction < floor:
            failures.append({"check": "P(rho_n = inf) >= 1 - eps", "level": level, "value": fraction, "bound": floor})
        stopped = mean_variation(stop(ensemble, rho_n), oracle, coarse)
        if stopped.estimate > constant + 3.0 * stopped.stderr:
            failures.append({"check": "Var(S^rho_n, D_n) <= C", "level": level, "value": stopped.estimate,
                             "bound": constant + 3.0 * stopped.stderr})
        per_level.append((level, fraction, stopped))

    samples = [rho_n.is_infinite.astype(np.float64) for rho_n in rhos]
    sequence = mazur_sequence(samples, window)
    rho = accumulation_stopping_time(rhos, sequence, factor)
    fraction = rho.fraction_infinite
    floor = 1.0 - 3.0 * epsilon - 3.0 * proportion_stderr(fraction, size)
    if fraction < floor:
        failures.append({"check": "P(rho = inf) >= 1 - 3 eps", "level": None, "value": fraction, "bound": floor})

    report_levels = []
    for level, fraction_n, stopped in per_level:
        accumulated = mean_variation_stopped(ensemble, oracle, rho, make_grid(level))
        upper = accumulated.upper_bound if accumulated.upper_bound is not None else accumulated.estimate
        bound = 2.0 * constant + 6.0 * sup_bound + 3.0 * accumulated.stderr
        if upper > bound:
            failures.append({"check": "Var(S^rho, D_n) <= 2C + 6 sup|S|", "level": level, "value": upper,
                             "bound": bound})
        report_levels.append(
            PipelineLevel(
                level=level,
                fraction_unstopped=fraction_n,
                stopped_variation=stopped.estimate,
                stopped_variation_stderr=stopped.stderr,
                accumulated_variation=accumulated.estimate,
                accumulated_upper_bound=upper,
                accumulated_stderr=accumulated.stderr,
            )
        )

    verdict = FAIL if failures else PASS
    logger.info(f"localisation pipeline: {verdict} ({len(failures)} violated bounds)")
    return PipelineReport(
        verdict=verdict,
        constant=constant,
        sup_bound=float(sup_bound),
        epsilon=epsilon,
        probe=probe,
        levels=report_levels,
        fraction_unstopped=fraction,
        rho=rho,
        failures=failures,
    )
