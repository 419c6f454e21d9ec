"""
Dyadic time grids on the unit interval.

Every ensemble, integrand and stopping time lives on a DyadicGrid D_n with
2**n + 1 points i / 2**n.
"""

from dataclasses import dataclass

import numpy as np

try:
    from grid_paths.errors import GridResourceError, StructuralError
except ImportError:
    from .errors import GridResourceError, StructuralError


MAX_LEVEL = 20


@dataclass(frozen=True)
class DyadicGrid:
    level: int

    @property
    def n_steps(self) -> int:
        return 2 ** self.level

    @property
    def n_points(self) -> int:
        return self.n_steps + 1

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_points, dtype=np.float64) / self.n_steps

    @property
    def infinity(self) -> int:
        """Index sentinel for a stopping time that never occurs."""
        return self.n_points

    def is_coarsening_of(self, other: "DyadicGrid") -> bool:
        return self.level <= other.level

    def stride(self, coarse: "DyadicGrid") -> int:
        """Number of steps of this grid per step of `coarse`."""
        if not coarse.is_coarsening_of(self):
            raise StructuralError(f"D_{coarse.level} is not a sub-grid of D_{self.level}")
        return 2 ** (self.level - coarse.level)

    def coarse_indices(self, coarse: "DyadicGrid") -> np.ndarray:
        """Indices in this grid of the points of `coarse`."""
        return np.arange(coarse.n_points) * self.stride(coarse)


def make_grid(n: int, cap: int = MAX_LEVEL) -> DyadicGrid:
    """Build the n-th dyadic partition of [0, 1]."""
    if n < 0:
        raise GridResourceError(f"grid level must be non-negative, got {n}")
    if n > cap:
        raise GridResourceError(
            f"grid level {n} exceeds the cap {cap} ({2 ** n + 1} points requested)"
        )
    return DyadicGrid(level=int(n))


def require_same_grid(a: DyadicGrid, b: DyadicGrid) -> None:
    if a != b:
        raise StructuralError(f"grid mismatch: D_{a.level} vs D_{b.level}")
