"""
Path ensembles: N sample paths of a process model on a dyadic grid.

Simulation draws every path from its own counter-based stream keyed by
(seed, path index), so an ensemble is a pure function of
(model, grid, n_paths, seed) whatever the number of worker threads.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

try:
    from grid_paths.errors import DomainError, StructuralError
    from grid_paths.grid import DyadicGrid, require_same_grid
    from grid_paths.models import ProcessModel
except ImportError:
    from .errors import DomainError, StructuralError
    from .grid import DyadicGrid, require_same_grid
    from .models import ProcessModel

logger = logging.getLogger(__name__)

try:
    from tqdm import tqdm
    HAS_TQDM = True
except ImportError:
    HAS_TQDM = False
    logger.warning("tqdm not installed. Install with: pip install tqdm for progress bars")

# Chunk boundaries depend only on n_paths, never on the worker count.
CHUNK_SIZE = 1024
SEED_LIMIT = 2 ** 64


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    Immutable sample of N paths.

    Attributes:
        grid: time grid of every path
        values: (N, 2**n + 1) matrix, path index by time index
        model: process model the paths were drawn from
        seed: root seed of the per-path streams
        synthesis_method: sampler actually used ("direct", "circulant", "cholesky")
        history: path generating the filtration (defaults to values)
        stopping: fine-grid stopping indices already applied, if any
        label: component name used in CSV output ("S", "M", "A", ...)
    """

    grid: DyadicGrid
    values: np.ndarray
    model: ProcessModel
    seed: int
    synthesis_method: str = "direct"
    history: Optional[np.ndarray] = None
    stopping: Optional[np.ndarray] = field(default=None, repr=False)
    label: str = "S"

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[1] != self.grid.n_points:
            raise StructuralError(
                f"values of shape {values.shape} do not fit D_{self.grid.level} "
                f"({self.grid.n_points} points)"
            )
        if values.shape[0] < 1:
            raise StructuralError("an ensemble needs at least one path")
        if not np.all(np.isfinite(values)):
            raise DomainError("ensemble values must be finite")
        object.__setattr__(self, "values", values)
        history = values if self.history is None else _frozen(self.history)
        if history.shape != values.shape:
            raise StructuralError("history must have the shape of the values")
        object.__setattr__(self, "history", history)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    @property
    def initial(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=1)

    def on(self, coarse: DyadicGrid) -> np.ndarray:
        """Values sampled at the points of a coarser grid."""
        return self.values[:, self.grid.coarse_indices(coarse)]

    def empirical_sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sup_bound(self) -> Tuple[float, bool]:
        """Return (bound on |S|, declared) preferring the model's declared bound."""
        declared = self.model.known_sup_bound
        if declared is not None:
            return float(declared), True
        logger.warning(
            f"model {self.model!r} declares no sup bound; using the empirical max, bounds that need "
            f"a true sup norm are heuristic"
        )
        return self.empirical_sup(), False

    def derive(self, values: np.ndarray, label: Optional[str] = None) -> "PathEnsemble":
        """A new ensemble on the same probability space with other values."""
        return replace(self, values=values, label=label or self.label)

    def same_space(self, other: "PathEnsemble") -> bool:
        return (
            self.grid == other.grid
            and self.n_paths == other.n_paths
            and self.seed == other.seed
            and self.model == other.model
        )

    def metadata(self) -> dict:
        return {
            "model": self.model.describe(),
            "seed": int(self.seed),
            "grid_level": self.grid.level,
            "n_paths": self.n_paths,
            "synthesis_method": self.synthesis_method,
        }


def path_generator(seed: int, path: int) -> np.random.Generator:
    """Counter-based stream of one path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path,))))


def simulate(
    model: ProcessModel,
    grid: DyadicGrid,
    n_paths: int,
    seed: int,
    workers: Optional[int] = None,
) -> PathEnsemble:
    """
    Draw n_paths paths of `model` on `grid`.

    Args:
        model: process model
        grid: time grid
        n_paths: number of paths (>= 1)
        seed: unsigned 64-bit root seed
        workers: worker threads (default: CPU count)

    Returns:
        PathEnsemble recording the synthesis method that ran
    """
    if n_paths < 1:
        raise DomainError(f"n_paths must be at least 1, got {n_paths}")
    if not 0 <= seed < SEED_LIMIT:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")

    workers = workers or os.cpu_count() or 1
    method = model.synthesis_method(grid)
    logger.info(f"Simulating {n_paths} paths of {model!r} on D_{grid.level} ({method})...")
    start_time = time.time()

    values = np.empty((n_paths, grid.n_points))
    history = np.empty((n_paths, grid.n_points))

    def run_chunk(lo: int, hi: int) -> None:
        draws = np.stack([model.draw(path_generator(seed, p), grid) for p in range(lo, hi)])
        chunk_values, chunk_history = model.transform(draws, grid)
        values[lo:hi] = chunk_values
        history[lo:hi] = chunk_history

    chunks = [(lo, min(lo + CHUNK_SIZE, n_paths)) for lo in range(0, n_paths, CHUNK_SIZE)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(run_chunk, lo, hi) for lo, hi in chunks]
            completed = as_completed(futures)
            if HAS_TQDM:
                completed = tqdm(completed, total=len(futures), desc="Simulating", unit="chunks",
                                 disable=len(futures) < 16)
            for future in completed:
                future.result()
    else:
        for lo, hi in chunks:
            run_chunk(lo, hi)

    ensemble = PathEnsemble(
        grid=grid,
        values=values,
        model=model,
        seed=int(seed),
        synthesis_method=method,
        history=history if model.separate_history else None,
    )
    logger.info(f"Simulation finished in {time.time() - start_time:.2f}s")
    return ensemble


def stop(ensemble: PathEnsemble, rho) -> PathEnsemble:
    """Freeze every path at its value at rho; paths with rho = inf are unchanged."""
    require_same_grid(ensemble.grid, rho.grid)
    if rho.n_paths != ensemble.n_paths:
        raise StructuralError(f"{rho.n_paths} stopping times for {ensemble.n_paths} paths")
    columns = np.arange(ensemble.grid.n_points)
    frozen_at = np.minimum(columns[None, :], rho.indices[:, None])
    values = np.take_along_axis(ensemble.values, frozen_at, axis=1)
    stopping = rho.indices if ensemble.stopping is None else np.minimum(ensemble.stopping, rho.indices)
    return replace(ensemble, values=values, stopping=stopping)


def split_large_jumps(ensemble: PathEnsemble, threshold: float) -> Tuple[PathEnsemble, PathEnsemble]:
    """
    Split S into J, the running sum of one-step increments with |dS| >= threshold,
    and the residual S - J. J + residual gives back S up to one rounding per entry.
    """
    if threshold <= 0:
        raise DomainError(f"jump threshold must be positive, got {threshold}")
    increments = ensemble.increments
    large = np.where(np.abs(increments) >= threshold, increments, 0.0)
    jumps = np.zeros_like(ensemble.values)
    jumps[:, 1:] = np.cumsum(large, axis=1)
    n_jumps = int(np.count_nonzero(large))
    logger.debug(f"{n_jumps} increments at or above {threshold} across {ensemble.n_paths} paths")
    return (
        ensemble.derive(jumps, label="J"),
        ensemble.derive(ensemble.values - jumps, label="residual"),
    )
