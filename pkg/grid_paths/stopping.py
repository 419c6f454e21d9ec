"""
Stopping times on dyadic grids.

A StoppingTimeVector holds one grid index per path, with grid.infinity
(one past the last index) standing for "never". Vectors are produced by
first_passage over a prefix predicate, or derived from such vectors by
operations that preserve the stopping-time property (minimum, rho_plus).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Tuple, Union

import numpy as np

try:
    from grid_paths.errors import StructuralError
    from grid_paths.grid import DyadicGrid, require_same_grid
    from grid_paths.ensemble import PathEnsemble, stop
except ImportError:
    from .errors import StructuralError
    from .grid import DyadicGrid, require_same_grid
    from .ensemble import PathEnsemble, stop

logger = logging.getLogger(__name__)

INF_LABEL = "inf"


@dataclass(frozen=True, eq=False)
class StoppingTimeVector:
    grid: DyadicGrid
    indices: np.ndarray

    def __post_init__(self):
        indices = np.array(self.indices, dtype=np.int64)
        if indices.ndim != 1:
            raise StructuralError("stopping indices must be a vector")
        if np.any(indices < 0) or np.any(indices > self.grid.infinity):
            raise StructuralError(f"stopping index outside 0..{self.grid.infinity}")
        indices.setflags(write=False)
        object.__setattr__(self, "indices", indices)

    @property
    def n_paths(self) -> int:
        return self.indices.size

    @property
    def is_infinite(self) -> np.ndarray:
        return self.indices == self.grid.infinity

    @property
    def fraction_infinite(self) -> float:
        return float(np.mean(self.is_infinite))

    @property
    def times(self) -> np.ndarray:
        """Stopping times in [0, 1] with np.inf for never."""
        return np.where(self.is_infinite, np.inf, self.indices / self.grid.n_steps)

    def capped(self) -> np.ndarray:
        """Indices with infinity mapped to the last grid index."""
        return np.minimum(self.indices, self.grid.n_steps)

    def occurred_by(self, i: int) -> np.ndarray:
        """The event {rho <= t_i}."""
        return self.indices <= i

    def to_list(self) -> List[Union[int, str]]:
        return [INF_LABEL if i == self.grid.infinity else int(i) for i in self.indices]

    @classmethod
    def from_list(cls, grid: DyadicGrid, entries: Iterable) -> "StoppingTimeVector":
        return cls(grid, [grid.infinity if str(e) == INF_LABEL else int(e) for e in entries])

    @classmethod
    def constant(cls, grid: DyadicGrid, n_paths: int, index: Optional[int]) -> "StoppingTimeVector":
        """The deterministic time t_index, or never when index is None."""
        value = grid.infinity if index is None else index
        return cls(grid, np.full(n_paths, value, dtype=np.int64))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StoppingTimeVector)
            and self.grid == other.grid
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self) -> str:
        return (
            f"StoppingTimeVector(D_{self.grid.level}, n_paths={self.n_paths}, "
            f"infinite={self.fraction_infinite:.3f})"
        )


Predicate = Callable[[np.ndarray, int], np.ndarray]


class PointwisePredicate:
    """A predicate that looks only at the current value S_{t_i}."""

    def __init__(self, test: Callable[[np.ndarray], np.ndarray], name: str):
        self.test = test
        self.name = name

    def __call__(self, prefix: np.ndarray, i: int) -> np.ndarray:
        return self.test(prefix[:, -1])

    def matrix(self, values: np.ndarray) -> np.ndarray:
        return self.test(values)

    def __repr__(self) -> str:
        return self.name


def abs_at_least(level: float) -> PointwisePredicate:
    return PointwisePredicate(lambda x: np.abs(x) >= level, f"|S| >= {level}")


def at_least(level: float) -> PointwisePredicate:
    return PointwisePredicate(lambda x: x >= level, f"S >= {level}")


def never() -> PointwisePredicate:
    return PointwisePredicate(lambda x: np.zeros(x.shape, dtype=bool), "never")


def always() -> PointwisePredicate:
    return PointwisePredicate(lambda x: np.ones(x.shape, dtype=bool), "always")


def at_index(index: int) -> Predicate:
    def predicate(prefix: np.ndarray, i: int) -> np.ndarray:
        return np.full(prefix.shape[0], i >= index)
    return predicate


def first_passage(
    ensemble: PathEnsemble,
    predicate: Predicate,
    on: Optional[DyadicGrid] = None,
) -> StoppingTimeVector:
    """
    Per path, the first grid index where the predicate holds, else infinity.

    The predicate is called as predicate(prefix, i) with prefix the read-only
    view values[:, :i + 1]; it must return one boolean per path. When `on` is
    a coarser grid only its points are examined.
    """
    grid = ensemble.grid
    candidates = grid.coarse_indices(on) if on is not None else np.arange(grid.n_points)
    result = np.full(ensemble.n_paths, grid.infinity, dtype=np.int64)

    if isinstance(predicate, PointwisePredicate):
        hits = predicate.matrix(ensemble.values[:, candidates])
        found = hits.any(axis=1)
        result[found] = candidates[np.argmax(hits[found], axis=1)]
        return StoppingTimeVector(grid, result)

    pending = np.ones(ensemble.n_paths, dtype=bool)
    for i in candidates:
        prefix = ensemble.values[:, : i + 1]
        hit = np.asarray(predicate(prefix, int(i)), dtype=bool) & pending
        result[hit] = i
        pending &= ~hit
        if not pending.any():
            break
    return StoppingTimeVector(grid, result)


def rho_plus(rho: StoppingTimeVector, coarse: DyadicGrid) -> StoppingTimeVector:
    """Smallest point of the coarse grid at or after rho, as a fine-grid index."""
    stride = rho.grid.stride(coarse)
    finite = ~rho.is_infinite
    result = rho.indices.copy()
    result[finite] = -(-rho.indices[finite] // stride) * stride
    return StoppingTimeVector(rho.grid, result)


def minimum(*rhos: StoppingTimeVector) -> StoppingTimeVector:
    if not rhos:
        raise StructuralError("minimum of no stopping times")
    for rho in rhos[1:]:
        require_same_grid(rhos[0].grid, rho.grid)
    return StoppingTimeVector(rhos[0].grid, np.minimum.reduce([r.indices for r in rhos]))


def localize_bounded(ensemble: PathEnsemble, level: float) -> Tuple[StoppingTimeVector, PathEnsemble]:
    """
    T = first time |S| >= level, and S stopped at T.

    The stopped paths are bounded by `level` plus the size of the last increment.
    """
    rho = first_passage(ensemble, abs_at_least(level))
    logger.debug(f"localisation at {level}: {rho.fraction_infinite:.3f} of paths never reach it")
    return rho, stop(ensemble, rho)
