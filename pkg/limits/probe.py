"""
Good-integrator probe: how fast the (1 - eps)-quantile of sup_H sup_t |(H.S)_t|
grows with the level, over a family of integrands bounded by one.

The family is a heuristic lower bound on the operator norm of H -> I_S(H);
a "bounded" verdict is evidence, not proof.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from grid_paths import DomainError, FractionalBrownianMotion, PathEnsemble
from integrands import LAG_ONE, ElementaryIntegrand, expected_lagged_sign_mean, lagged_sign_integrand
from variation import ConditionalDriftOracle, sign_integrand

try:
    from limits.convergence import TAIL_FRACTION, growth_fit
except ImportError:
    from .convergence import TAIL_FRACTION, growth_fit

logger = logging.getLogger(__name__)

FAMILY = ("lagged1", "lagged2", "drift", "random")

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
INCONCLUSIVE = "inconclusive"


@dataclass
class ProbeLevel:
    level: int
    constant: float
    stderr: float
    members: Dict[str, float] = field(default_factory=dict)
    target: Optional[float] = None

    def to_dict(self) -> dict:
        return {"n": self.level, "C": self.constant, "stderr": self.stderr, "members": self.members,
                "target": self.target}


@dataclass
class ProbeResult:
    """
    Attributes:
        levels: C(eps, n) per level, with per-member quantiles
        exponent: fitted slope of log2 C(eps, n) against n over the top levels
        fit: r^2 of that fit
        verdict: "bounded", "unbounded" or "inconclusive"
        epsilon: tail probability eps
        family: probe members used
        fit_levels: levels that entered the fit
    """

    levels: List[ProbeLevel]
    exponent: float
    fit: float
    verdict: str
    epsilon: float
    family: List[str]
    fit_levels: List[int] = field(default_factory=list)

    @property
    def constants(self) -> np.ndarray:
        return np.array([entry.constant for entry in self.levels])

    def localization_constant(self, sup_bound: float) -> float:
        """
        The C handed to the stopping construction: rho_n then fires only where the
        probe statistic exceeds every C(eps, n), so P(rho_n < inf) <= eps empirically.
        """
        return float(np.nextafter(np.max(self.constants), np.inf)) + 2.0 * sup_bound

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "levels": [entry.to_dict() for entry in self.levels],
            "exponent": self.exponent,
            "fit": self.fit,
            "epsilon": self.epsilon,
            "family": self.family,
            "fit_levels": self.fit_levels,
        }


def empirical_quantile(sample: np.ndarray, epsilon: float):
    """
    The (1 - eps) order statistic, leaving at most floor(eps N) values above it,
    and a standard error from the binomial spread of the rank.
    """
    ordered = np.sort(np.asarray(sample, dtype=np.float64))
    size = ordered.size
    above = int(math.floor(epsilon * size))
    rank = max(size - above - 1, 0)
    spread = int(math.ceil(math.sqrt(size * epsilon * (1.0 - epsilon))))
    low, high = max(rank - spread, 0), min(rank + spread, size - 1)
    return float(ordered[rank]), float(ordered[high] - ordered[low]) / 2.0


def random_sign_integrand(ensemble: PathEnsemble, level: int) -> ElementaryIntegrand:
    """Independent fair signs, drawn from a stream keyed by (seed, level)."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(ensemble.seed, spawn_key=(level, 1))))
    coefficients = rng.choice([-1.0, 1.0], size=(ensemble.n_paths, 2 ** level))
    coefficients[:, 0] = 0.0
    return ElementaryIntegrand(level, coefficients, LAG_ONE, 1.0)


def build_member(name: str, ensemble: PathEnsemble, level: int, oracle: Optional[ConditionalDriftOracle]):
    if name == "lagged1":
        return lagged_sign_integrand(ensemble, level, 1)
    if name == "lagged2":
        return lagged_sign_integrand(ensemble, level, 2)
    if name == "drift":
        return sign_integrand(ensemble, oracle or ConditionalDriftOracle.for_model(ensemble.model), level)
    if name == "random":
        return random_sign_integrand(ensemble, level)
    raise DomainError(f"unknown probe member {name!r}; choose from {FAMILY}")


def probe_statistic(
    ensemble: PathEnsemble,
    level: int,
    family: Sequence[str] = FAMILY,
    oracle: Optional[ConditionalDriftOracle] = None,
    workers: int = 1,
) -> Dict[str, np.ndarray]:
    """Per member, per path: max over D_n times of |(H.S)_t|."""

    def evaluate(name: str) -> np.ndarray:
        integrand = build_member(name, ensemble, level, oracle)
        return np.max(np.abs(integrand.at_points(ensemble)), axis=1)

    if workers > 1 and len(family) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(evaluate, family))
    else:
        results = [evaluate(name) for name in family]
    return dict(zip(family, results))


def good_integrator_probe(
    ensemble: PathEnsemble,
    levels: Sequence[int],
    epsilon: float,
    family: Sequence[str] = FAMILY,
    oracle: Optional[ConditionalDriftOracle] = None,
    bounded_exponent: float = 0.05,
    unbounded_exponent: float = 0.15,
    min_fit: float = 0.9,
    fit_fraction: float = TAIL_FRACTION,
    workers: int = 1,
) -> ProbeResult:
    """
    C(eps, n) for each level and a verdict on its growth in n.

    The growth exponent is fitted on the top levels only: at coarse levels the
    O(1) martingale part of the quantile hides the growth of the drift part.

    Args:
        ensemble: paths of S on a grid at least as fine as max(levels)
        levels: at least three levels
        epsilon: tail probability in (0, 1)
        family: members among "lagged1", "lagged2", "drift", "random"
        oracle: drift oracle for the "drift" member (default: the model's own)
        bounded_exponent: slopes at or below this are "bounded"
        unbounded_exponent: slopes at or above this with a good fit are "unbounded"
        min_fit: r^2 required for "unbounded"
        fit_fraction: share of the levels, from the top, entering the fit
        workers: threads evaluating family members
    """
    levels = sorted(int(n) for n in levels)
    if len(levels) < 3:
        raise DomainError(f"the probe needs at least 3 levels for a verdict, got {len(levels)}")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    family = list(family)

    entries = []
    for level in levels:
        statistics = probe_statistic(ensemble, level, family, oracle, workers)
        combined = np.max(np.stack(list(statistics.values())), axis=0)
        constant, stderr = empirical_quantile(combined, epsilon)
        members = {name: empirical_quantile(values, epsilon)[0] for name, values in statistics.items()}
        target = None
        if isinstance(ensemble.model, FractionalBrownianMotion):
            target = expected_lagged_sign_mean(ensemble.model.hurst, level, 1)
        entries.append(ProbeLevel(level, constant, stderr, members, target))
        logger.info(f"probe level {level}: C({epsilon}) = {constant:.4g} +/- {stderr:.2g}")

    exponent, r_squared, fit_levels = growth_fit(levels, [entry.constant for entry in entries], fit_fraction)
    if exponent <= bounded_exponent:
        verdict = BOUNDED
    elif exponent >= unbounded_exponent and r_squared >= min_fit:
        verdict = UNBOUNDED
    else:
        verdict = INCONCLUSIVE
    logger.info(f"probe exponent {exponent:.3f} over levels {fit_levels} (r^2 {r_squared:.3f}): {verdict}")
    return ProbeResult(entries, exponent, r_squared, verdict, epsilon, family, fit_levels)
