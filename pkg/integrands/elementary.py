"""
Elementary integrands on D_n: K = sum_i K^i 1_(i/2^n, (i+1)/2^n].

Each integrand carries a measurability tag: LAG_ONE when K^i is known at
(i-1)/2^n (and K^0 = 0), LAG_ZERO when K^i is known at i/2^n, and
ANTICIPATING for pathwise constructions that look ahead.
"""

import logging
from dataclasses import dataclass

import numpy as np

from grid_paths import (
    DomainError,
    DyadicGrid,
    PathEnsemble,
    StructuralError,
    fgn_autocovariance,
    make_grid,
    require_same_grid,
)

try:
    from integrands.simple import SimpleIntegrand
except ImportError:
    from .simple import SimpleIntegrand

logger = logging.getLogger(__name__)

ANTICIPATING = -1
LAG_ZERO = 0
LAG_ONE = 1

LAG_NAMES = {ANTICIPATING: "anticipating", LAG_ZERO: "lag-zero", LAG_ONE: "lag-one"}


def coarse_grid(ensemble: PathEnsemble, level: int) -> DyadicGrid:
    if level > ensemble.grid.level:
        raise StructuralError(f"level {level} exceeds the grid level {ensemble.grid.level} of the ensemble")
    return make_grid(level)


def running_sums(coefficients: np.ndarray, coarse_values: np.ndarray) -> np.ndarray:
    """(N, 2^n + 1) partial sums of K^i (S_{i+1} - S_i); column 0 is zero."""
    products = coefficients * np.diff(coarse_values, axis=1)
    sums = np.zeros(coarse_values.shape)
    np.cumsum(products, axis=1, out=sums[:, 1:])
    return sums


@dataclass(frozen=True, eq=False)
class ElementaryIntegrand:
    level: int
    coefficients: np.ndarray
    lag: int
    bound: float

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=np.float64)
        if coefficients.ndim != 2 or coefficients.shape[1] != 2 ** self.level:
            raise StructuralError(f"coefficients of shape {coefficients.shape} do not fit D_{self.level}")
        if self.lag not in LAG_NAMES:
            raise StructuralError(f"unknown measurability tag {self.lag}")
        if self.lag == LAG_ONE and np.any(coefficients[:, 0] != 0):
            raise StructuralError("a lag-one elementary integrand has K^0 = 0")
        if not np.all(np.isfinite(coefficients)):
            raise DomainError("integrand coefficients must be finite")
        if np.any(np.abs(coefficients) > self.bound):
            raise DomainError(f"coefficients exceed the declared bound {self.bound}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def grid(self) -> DyadicGrid:
        return make_grid(self.level)

    @property
    def n_paths(self) -> int:
        return self.coefficients.shape[0]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0

    def tag(self) -> dict:
        return {"kind": "elementary", "lag": LAG_NAMES[self.lag], "bound": self.bound}

    def _sums(self, ensemble: PathEnsemble) -> np.ndarray:
        if ensemble.n_paths != self.n_paths:
            raise StructuralError(f"integrand has {self.n_paths} paths, ensemble has {ensemble.n_paths}")
        return running_sums(self.coefficients, ensemble.on(coarse_grid(ensemble, self.level)))

    def integrate(self, ensemble: PathEnsemble) -> np.ndarray:
        return self._sums(ensemble)[:, -1].copy()

    def integral_process(self, ensemble: PathEnsemble) -> PathEnsemble:
        """
        (K.S)_t on the fine grid of the ensemble: X_j + K^j (S_t - S_{j/2^n}) for t in
        (j/2^n, (j+1)/2^n], which coincides with the coarse partial sums at D_n points.
        """
        sums = self._sums(ensemble)
        stride = ensemble.grid.stride(self.grid)
        fine = np.arange(1, ensemble.grid.n_points)
        bucket = (fine - 1) // stride
        values = np.zeros(ensemble.values.shape)
        values[:, 1:] = sums[:, bucket] + self.coefficients[:, bucket] * (
            ensemble.values[:, fine] - ensemble.values[:, bucket * stride]
        )
        return ensemble.derive(values, label="H.S")

    def at_points(self, ensemble: PathEnsemble) -> np.ndarray:
        """(K.S) at the points of D_n only."""
        return self._sums(ensemble)

    def combine(self, a: float, b: float, other: "ElementaryIntegrand") -> "ElementaryIntegrand":
        if other.level != self.level:
            raise StructuralError(f"levels {self.level} and {other.level} differ")
        return ElementaryIntegrand(
            self.level,
            a * self.coefficients + b * other.coefficients,
            min(self.lag, other.lag),
            abs(a) * self.bound + abs(b) * other.bound,
        )


def discretize(process: PathEnsemble, level: int) -> ElementaryIntegrand:
    """K^{D_n}: coefficients K_{i/2^n}, tagged lag-zero."""
    coefficients = process.on(coarse_grid(process, level))[:, :-1]
    return ElementaryIntegrand(level, coefficients, LAG_ZERO, float(np.max(np.abs(coefficients))))


def riemann_sum(ensemble: PathEnsemble, process: PathEnsemble, level: int) -> np.ndarray:
    """sum_i K_{i/2^n} (S_{(i+1)/2^n} - S_{i/2^n}) per path."""
    require_same_grid(ensemble.grid, process.grid)
    return discretize(process, level).integrate(ensemble)


def shift_to_elementary(integrand: SimpleIntegrand, level: int) -> ElementaryIntegrand:
    """
    Move every breakpoint tau_i to sigma_i = 1 ^ (floor(tau_i 2^n) + 2) / 2^n.

    Since tau_i + 1/2^n <= sigma_i the result is lag-one measurable. The bucket
    is the half-open j/2^n <= tau_i < (j+1)/2^n, so a tau_i on D_n moves two
    steps, to tau_i + 2/2^n. With the bucket j/2^n < tau_i <= (j+1)/2^n it would
    move one step; the half-open choice is the one that reproduces
    sigma = 0.5 for tau = 0.3 and sigma = 0.75 for tau = 0.5 on D_2.
    """
    fine = integrand.grid
    stride = fine.stride(make_grid(level))
    n_steps = 2 ** level
    shifted = [
        np.minimum(n_steps, np.where(tau.is_infinite, n_steps, tau.indices // stride + 2))
        for tau in integrand.breakpoints
    ]
    steps = np.arange(n_steps)[None, :]
    coefficients = np.zeros((integrand.n_paths, n_steps))
    for i in range(integrand.values.shape[1]):
        inside = (shifted[i][:, None] <= steps) & (steps < shifted[i + 1][:, None])
        coefficients = np.where(inside, integrand.values[:, i][:, None], coefficients)
    return ElementaryIntegrand(level, coefficients, LAG_ONE, integrand.bound)


def lagged_sign_integrand(ensemble: PathEnsemble, level: int, lag: int) -> ElementaryIntegrand:
    """K^i = sign(S_{(i-lag+1)/2^n} - S_{(i-lag)/2^n}) for i >= lag, else 0."""
    if lag not in (1, 2):
        raise DomainError(f"lag must be 1 or 2, got {lag}")
    increments = np.diff(ensemble.on(coarse_grid(ensemble, level)), axis=1)
    coefficients = np.zeros(increments.shape)
    coefficients[:, lag:] = np.sign(increments[:, :-lag])
    return ElementaryIntegrand(level, coefficients, LAG_ZERO if lag == 1 else LAG_ONE, 1.0)


def expected_lagged_sign_mean(hurst: float, level: int, lag: int) -> float:
    """E[I_S(K)] of the lagged sign probe for fractional Brownian motion S on D_n."""
    correlation = float(fgn_autocovariance(hurst, lag))
    return (2 ** level - lag) * 2.0 ** (-level * hurst) * correlation * np.sqrt(2 / np.pi)


def total_variation(ensemble: PathEnsemble, level: int) -> np.ndarray:
    """
    sum_i |S_{(i+1)/2^n} - S_{i/2^n}| per path, i.e. the integral of the
    anticipating integrand sign(S_{(i+1)/2^n} - S_{i/2^n}).
    """
    increments = np.diff(ensemble.on(coarse_grid(ensemble, level)), axis=1)
    integrand = ElementaryIntegrand(level, np.sign(increments), ANTICIPATING, 1.0)
    return integrand.integrate(ensemble)
