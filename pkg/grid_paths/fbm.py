"""
Fractional Brownian motion on dyadic grids.

Exact synthesis by circulant embedding of the fractional Gaussian noise
covariance (Davies-Harte), with a dense Cholesky factorisation of the fBm
covariance as fallback when the embedding is not positive or the grid is tiny.
"""

import logging
from typing import Union

import numpy as np
from scipy import fft as sp_fft
from scipy import linalg

try:
    from grid_paths.errors import DomainError
except ImportError:
    from .errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

CIRCULANT = "circulant"
CHOLESKY = "cholesky"

# Below this many steps the dense factorisation is cheaper than the FFT set-up.
CIRCULANT_MIN_STEPS = 8


def check_hurst(hurst: float) -> float:
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"Hurst parameter must lie in (0, 1), got {hurst}")
    return float(hurst)


def fbm_covariance(hurst: float, s: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Cov(B_s, B_t) = (s^2H + t^2H - |t - s|^2H) / 2."""
    two_h = 2.0 * check_hurst(hurst)
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any((s < 0) | (s > 1) | (t < 0) | (t > 1)):
        raise DomainError("fBm covariance is defined for times in [0, 1]")
    cov = 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h - np.abs(t - s) ** two_h)
    return float(cov) if cov.ndim == 0 else cov


def fgn_autocovariance(hurst: float, k: ArrayLike) -> ArrayLike:
    """Autocovariance of unit-step fractional Gaussian noise at lag k."""
    two_h = 2.0 * check_hurst(hurst)
    k = np.abs(np.asarray(k, dtype=np.float64))
    gamma = 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)
    return float(gamma) if gamma.ndim == 0 else gamma


class FbmSynthesizer:
    """
    Turns standard normal draws into fBm paths on a fixed dyadic grid.

    `method` is "auto", "circulant" or "cholesky". After construction,
    `self.method` holds the method that will actually run.
    """

    def __init__(self, hurst: float, n_steps: int, method: str = "auto"):
        self.hurst = check_hurst(hurst)
        self.n_steps = int(n_steps)
        self.scale = (1.0 / self.n_steps) ** self.hurst
        self._sqrt_eigenvalues = None
        self._cholesky = None

        if method not in ("auto", CIRCULANT, CHOLESKY):
            raise DomainError(f"unknown fBm synthesis method: {method}")

        wants_circulant = method == CIRCULANT or (
            method == "auto" and self.n_steps >= CIRCULANT_MIN_STEPS
        )
        if wants_circulant and self._prepare_circulant():
            self.method = CIRCULANT
        else:
            if wants_circulant:
                logger.warning(
                    f"Circulant embedding not positive for H={self.hurst}, "
                    f"{self.n_steps} steps; falling back to Cholesky"
                )
            self._prepare_cholesky()
            self.method = CHOLESKY

    @property
    def normals_per_path(self) -> int:
        if self.method == CIRCULANT:
            return 4 * self.n_steps
        return self.n_steps

    def _prepare_circulant(self) -> bool:
        n = self.n_steps
        lags = np.arange(n + 1)
        gamma = fgn_autocovariance(self.hurst, lags)
        row = np.concatenate([gamma, gamma[n - 1:0:-1]])
        eigenvalues = sp_fft.fft(row).real
        if np.any(eigenvalues < -1e-10 * np.max(np.abs(eigenvalues))):
            return False
        self._sqrt_eigenvalues = np.sqrt(np.clip(eigenvalues, 0.0, None) / row.size)
        return True

    def _prepare_cholesky(self) -> None:
        times = np.arange(1, self.n_steps + 1) / self.n_steps
        cov = fbm_covariance(self.hurst, times[:, None], times[None, :])
        self._cholesky = linalg.cholesky(cov, lower=True)

    def paths(self, normals: np.ndarray) -> np.ndarray:
        """Map a (paths x normals_per_path) matrix of N(0,1) draws to fBm paths."""
        normals = np.atleast_2d(normals)
        out = np.zeros((normals.shape[0], self.n_steps + 1))
        if self.method == CIRCULANT:
            m = 2 * self.n_steps
            z = normals[:, :m] + 1j * normals[:, m:2 * m]
            noise = sp_fft.fft(self._sqrt_eigenvalues * z, axis=1).real[:, :self.n_steps]
            out[:, 1:] = np.cumsum(noise * self.scale, axis=1)
        else:
            out[:, 1:] = normals @ self._cholesky.T
        return out
