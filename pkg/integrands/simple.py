"""
Simple integrands H = sum_i H^i 1_(tau_i, tau_i+1] with stopping-time breakpoints.

The module-level integrate / integral_process / sup_norm / linear_combination
accept both SimpleIntegrand and ElementaryIntegrand.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from grid_paths import (
    DomainError,
    DyadicGrid,
    PathEnsemble,
    StoppingTimeVector,
    StructuralError,
    require_same_grid,
)

logger = logging.getLogger(__name__)


def check_ensemble(ensemble: PathEnsemble, grid: DyadicGrid, n_paths: int) -> None:
    require_same_grid(ensemble.grid, grid)
    if ensemble.n_paths != n_paths:
        raise StructuralError(f"integrand has {n_paths} paths, ensemble has {ensemble.n_paths}")


@dataclass(frozen=True, eq=False)
class SimpleIntegrand:
    """
    Attributes:
        breakpoints: k + 1 stopping times, non-decreasing per path
        values: (N, k) matrix, column i is H^i (known at tau_i)
        bound: declared bound on |H^i|
    """

    breakpoints: tuple
    values: np.ndarray
    bound: float

    def __post_init__(self):
        breakpoints = tuple(self.breakpoints)
        if len(breakpoints) < 2:
            raise StructuralError("a simple integrand needs at least two breakpoints")
        grid = breakpoints[0].grid
        for rho in breakpoints[1:]:
            require_same_grid(grid, rho.grid)
        values = np.array(self.values, dtype=np.float64)
        n_paths = breakpoints[0].n_paths
        if values.shape != (n_paths, len(breakpoints) - 1):
            raise StructuralError(
                f"values of shape {values.shape} for {len(breakpoints)} breakpoints on {n_paths} paths"
            )
        for earlier, later in zip(breakpoints, breakpoints[1:]):
            if np.any(earlier.indices > later.indices):
                raise StructuralError("breakpoints must be non-decreasing on every path")
        if not np.all(np.isfinite(values)):
            raise DomainError("integrand values must be finite")
        if np.any(np.abs(values) > self.bound):
            raise DomainError(f"integrand values exceed the declared bound {self.bound}")
        values.setflags(write=False)
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def grid(self) -> DyadicGrid:
        return self.breakpoints[0].grid

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def capped(self) -> np.ndarray:
        """(k + 1, N) breakpoint indices with infinity mapped to t = 1."""
        return np.stack([rho.capped() for rho in self.breakpoints])

    def sup_norm(self) -> float:
        capped = self.capped()
        live = capped[1:].T > capped[:-1].T
        if not live.any():
            return 0.0
        return float(np.max(np.abs(self.values[live])))

    def _accumulate(self, values: np.ndarray, clock: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Sum_i H^i (S_{tau_i+1 ^ t} - S_{tau_i ^ t}) for every column t of `clock`,
        or at t = 1 when clock is None.
        """
        capped = self.capped()
        total = 0.0
        for i in range(self.values.shape[1]):
            if clock is None:
                left = np.take_along_axis(values, capped[i][:, None], axis=1)[:, 0]
                right = np.take_along_axis(values, capped[i + 1][:, None], axis=1)[:, 0]
                coefficient = self.values[:, i]
            else:
                left = np.take_along_axis(values, np.minimum(capped[i][:, None], clock), axis=1)
                right = np.take_along_axis(values, np.minimum(capped[i + 1][:, None], clock), axis=1)
                coefficient = self.values[:, i][:, None]
            total = total + coefficient * (right - left)
        return total

    def integrate(self, ensemble: PathEnsemble) -> np.ndarray:
        check_ensemble(ensemble, self.grid, self.n_paths)
        result = self._accumulate(ensemble.values)
        return np.broadcast_to(result, (self.n_paths,)).astype(np.float64)

    def integral_process(self, ensemble: PathEnsemble) -> PathEnsemble:
        check_ensemble(ensemble, self.grid, self.n_paths)
        clock = np.broadcast_to(np.arange(self.grid.n_points), ensemble.values.shape)
        process = self._accumulate(ensemble.values, clock)
        return ensemble.derive(np.broadcast_to(process, ensemble.values.shape), label="H.S")

    def restrict_to(self, rho: StoppingTimeVector) -> "SimpleIntegrand":
        """H 1_(0, rho]: every breakpoint replaced by tau_i ^ rho."""
        require_same_grid(self.grid, rho.grid)
        clipped = [StoppingTimeVector(self.grid, np.minimum(tau.indices, rho.indices)) for tau in self.breakpoints]
        return SimpleIntegrand(tuple(clipped), self.values, self.bound)

    def value_after(self, index: np.ndarray) -> np.ndarray:
        """Per path, H on the grid step just after the given (capped) index."""
        capped = self.capped()
        result = np.zeros(self.n_paths)
        for i in range(self.values.shape[1]):
            inside = (capped[i] <= index) & (index < capped[i + 1])
            result = np.where(inside, self.values[:, i], result)
        return result

    @classmethod
    def indicator(
        cls, grid: DyadicGrid, n_paths: int, start: int = 0, end: Optional[int] = None, value: float = 1.0
    ) -> "SimpleIntegrand":
        """value * 1_(t_start, t_end] on every path; end=None means t = 1."""
        end = grid.n_steps if end is None else end
        return cls.deterministic(grid, n_paths, [start, end], [value])

    @classmethod
    def deterministic(
        cls, grid: DyadicGrid, n_paths: int, indices: Sequence[int], values: Sequence[float]
    ) -> "SimpleIntegrand":
        breakpoints = tuple(StoppingTimeVector.constant(grid, n_paths, i) for i in indices)
        matrix = np.tile(np.asarray(values, dtype=np.float64), (n_paths, 1))
        bound = float(np.max(np.abs(matrix))) if matrix.size else 0.0
        return cls(breakpoints, matrix, bound)

    @classmethod
    def from_prefix_functions(
        cls,
        ensemble: PathEnsemble,
        breakpoints: Sequence[StoppingTimeVector],
        functions: Sequence[Callable[[np.ndarray], np.ndarray]],
        bound: float,
    ) -> "SimpleIntegrand":
        """
        H^i = functions[i](prefix), where prefix is the history with every entry
        after tau_i replaced by NaN. Values at tau_i = inf are set to 0.
        """
        if len(functions) != len(breakpoints) - 1:
            raise StructuralError(f"{len(breakpoints)} breakpoints need {len(breakpoints) - 1} functions")
        columns = np.arange(ensemble.grid.n_points)[None, :]
        values = np.zeros((ensemble.n_paths, len(functions)))
        for i, (tau, function) in enumerate(zip(breakpoints, functions)):
            prefix = np.where(columns <= tau.indices[:, None], ensemble.history, np.nan)
            values[:, i] = np.where(tau.is_infinite, 0.0, function(prefix))
        return cls(tuple(breakpoints), values, bound)


def integrate(ensemble: PathEnsemble, integrand) -> np.ndarray:
    """I_S(H) per path."""
    return integrand.integrate(ensemble)


def integral_process(ensemble: PathEnsemble, integrand) -> PathEnsemble:
    """(H.S)_t for every grid time t; the last column equals integrate(S, H)."""
    return integrand.integral_process(ensemble)


def sup_norm(integrand) -> float:
    return integrand.sup_norm()


def linear_combination(a: float, first, b: float, second):
    """a H + b G for two integrands of the same class."""
    if type(first) is not type(second):
        raise StructuralError("cannot combine integrands of different classes")
    if not isinstance(first, SimpleIntegrand):
        return first.combine(a, b, second)
    require_same_grid(first.grid, second.grid)
    merged = np.sort(
        np.stack([rho.indices for rho in first.breakpoints + second.breakpoints]), axis=0
    )
    grid = first.grid
    breakpoints = tuple(StoppingTimeVector(grid, row) for row in merged)
    lefts = np.minimum(merged[:-1], grid.n_steps)
    values = np.stack(
        [a * first.value_after(left) + b * second.value_after(left) for left in lefts], axis=1
    )
    bound = abs(a) * first.bound + abs(b) * second.bound
    return SimpleIntegrand(breakpoints, values, bound)
