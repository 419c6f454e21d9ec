"""
Mean variation Var(S, pi) = E[sum_i |E[S_{t_i+1} - S_{t_i} | F_{t_i}]|] and its
stopped variant, reported level by level.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from grid_paths import DyadicGrid, PathEnsemble, StoppingTimeVector, make_grid, require_same_grid

try:
    from variation.oracles import ConditionalDriftOracle, drift_matrix
except ImportError:
    from .oracles import ConditionalDriftOracle, drift_matrix

logger = logging.getLogger(__name__)

# Relative last-step increase below which the level sequence counts as settled
SETTLED_INCREASE = 0.05


def mean_and_stderr(sample: np.ndarray):
    sample = np.asarray(sample, dtype=np.float64)
    stderr = float(np.std(sample, ddof=1) / np.sqrt(sample.size)) if sample.size > 1 else 0.0
    return float(np.mean(sample)), stderr


@dataclass
class MeanVariationEntry:
    """
    One level of a mean-variation report.

    upper_bound is set for stopped entries whose rho does not live on pi: the
    gated estimate is then Var(S^{rho+}, pi), and Var(S^rho, pi) is certified
    to be at most estimate + 2 sup|S|.
    """

    level: int
    estimate: float
    stderr: float
    oracle: str
    stopped: bool = False
    fraction_unstopped: Optional[float] = None
    upper_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "oracle": self.oracle,
            "stopped": self.stopped,
            "fraction_unstopped": self.fraction_unstopped,
            "upper_bound": self.upper_bound,
        }


@dataclass
class MeanVariationReport:
    """
    Var(S, D_n) for a range of levels plus a flag describing the sequence:
    "settled" (non-decreasing within 3 SE and the last relative increase is
    small), "growing" (non-decreasing but still increasing), "non-monotone".
    """

    entries: List[MeanVariationEntry] = field(default_factory=list)

    @property
    def estimates(self) -> np.ndarray:
        return np.array([e.estimate for e in self.entries])

    def is_monotone(self, tolerance: float = 3.0) -> bool:
        for earlier, later in zip(self.entries, self.entries[1:]):
            combined = np.hypot(earlier.stderr, later.stderr)
            if later.estimate < earlier.estimate - tolerance * combined:
                return False
        return True

    @property
    def extrapolation(self) -> str:
        if not self.is_monotone():
            return "non-monotone"
        if len(self.entries) < 2:
            return "growing"
        last, previous = self.entries[-1].estimate, self.entries[-2].estimate
        increase = last - previous
        if increase <= SETTLED_INCREASE * max(abs(last), np.finfo(float).tiny):
            return "settled"
        return "growing"

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "extrapolation": self.extrapolation}


def path_variation(
    ensemble: PathEnsemble, oracle: ConditionalDriftOracle, coarse: DyadicGrid, gate: Optional[np.ndarray] = None
) -> np.ndarray:
    """sum_i |drift_i| along pi for every path."""
    return np.abs(drift_matrix(ensemble, oracle, coarse, gate=gate)).sum(axis=1)


def mean_variation(ensemble: PathEnsemble, oracle: ConditionalDriftOracle, coarse: DyadicGrid) -> MeanVariationEntry:
    """Var(S, pi) with its Monte Carlo standard error."""
    estimate, stderr = mean_and_stderr(path_variation(ensemble, oracle, coarse))
    logger.debug(f"Var(S, D_{coarse.level}) = {estimate:.6g} +/- {stderr:.2g}")
    return MeanVariationEntry(
        level=coarse.level,
        estimate=estimate,
        stderr=stderr,
        oracle=oracle.kind.value,
        stopped=ensemble.stopping is not None,
    )


def mean_variation_stopped(
    ensemble: PathEnsemble, oracle: ConditionalDriftOracle, rho: StoppingTimeVector, coarse: DyadicGrid
) -> MeanVariationEntry:
    """
    sum_i 1{t_i < rho} |drift_i| averaged over paths, i.e. Var(S^{rho+}, pi).
    """
    require_same_grid(ensemble.grid, rho.grid)
    estimate, stderr = mean_and_stderr(path_variation(ensemble, oracle, coarse, gate=rho.indices))
    stride = ensemble.grid.stride(coarse)
    finite = ~rho.is_infinite
    upper_bound = None
    if np.any(rho.indices[finite] % stride):
        sup, _ = ensemble.sup_bound()
        upper_bound = estimate + 2.0 * sup
    return MeanVariationEntry(
        level=coarse.level,
        estimate=estimate,
        stderr=stderr,
        oracle=oracle.kind.value,
        stopped=True,
        fraction_unstopped=rho.fraction_infinite,
        upper_bound=upper_bound,
    )


def mean_variation_report(
    ensemble: PathEnsemble,
    oracle: ConditionalDriftOracle,
    levels: Sequence[int],
    rho: Optional[StoppingTimeVector] = None,
) -> MeanVariationReport:
    """Var(S, D_n) (or its stopped variant) for every requested level."""
    report = MeanVariationReport()
    for level in levels:
        coarse = make_grid(level)
        if rho is None:
            report.entries.append(mean_variation(ensemble, oracle, coarse))
        else:
            report.entries.append(mean_variation_stopped(ensemble, oracle, rho, coarse))
    logger.info(f"Mean variation over levels {list(levels)}: {report.extrapolation}")
    return report
