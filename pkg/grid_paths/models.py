"""
Process models: samplers plus the facts the oracles rely on.

Each model draws its per-path randomness from a generator it is handed (one
stream per path) and turns a matrix of draws into path values. A model also
returns the "history" matrix, i.e. the path that generates the filtration;
for most models this is the value matrix itself.
"""

from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

try:
    from grid_paths.errors import DomainError
    from grid_paths.grid import DyadicGrid
    from grid_paths.fbm import FbmSynthesizer, check_hurst
except ImportError:
    from .errors import DomainError
    from .grid import DyadicGrid
    from .fbm import FbmSynthesizer, check_hurst


class ModelKind(Enum):
    BROWNIAN = "brownian"
    FBM = "fbm"
    COMPENSATED_POISSON = "compensated_poisson"
    SQUARED_BROWNIAN = "squared_brownian"
    ORNSTEIN_UHLENBECK = "ornstein_uhlenbeck"
    DETERMINISTIC = "deterministic"
    BOUNDED_TRUNCATION = "bounded_truncation"


# Labels shared with variation.oracles.OracleKind
ANALYTIC = "analytic"
GAUSSIAN_LINEAR = "gaussian-linear"

DIRECT = "direct"


class ProcessModel:
    """Base class. Subclasses set the class-level facts and implement draw/transform."""

    kind: ModelKind
    initial_value: float = 0.0
    is_markov: bool = True
    is_gaussian: bool = False
    exact_oracle: Optional[str] = ANALYTIC
    known_sup_bound: Optional[float] = None
    separate_history: bool = False

    @property
    def has_exact_drift_oracle(self) -> bool:
        return self.exact_oracle is not None

    def draw(self, rng: np.random.Generator, grid: DyadicGrid) -> np.ndarray:
        raise NotImplementedError

    def transform(self, draws: np.ndarray, grid: DyadicGrid) -> Tuple[np.ndarray, np.ndarray]:
        """Return (values, history), each of shape (paths, grid.n_points)."""
        raise NotImplementedError

    def synthesis_method(self, grid: DyadicGrid) -> str:
        return DIRECT

    def parameters(self) -> Dict:
        return {}

    def describe(self) -> Dict:
        return {"kind": self.kind.value, **self.parameters()}

    def __eq__(self, other) -> bool:
        return isinstance(other, ProcessModel) and self.describe() == other.describe()

    def __hash__(self) -> int:
        return hash(repr(self.describe()))

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in self.parameters().items())
        return f"{type(self).__name__}({params})"


class BrownianMotion(ProcessModel):
    kind = ModelKind.BROWNIAN
    is_gaussian = True

    def __init__(self, drift: float = 0.0, volatility: float = 1.0, initial_value: float = 0.0):
        if volatility < 0:
            raise DomainError(f"volatility must be non-negative, got {volatility}")
        self.drift = float(drift)
        self.volatility = float(volatility)
        self.initial_value = float(initial_value)

    def draw(self, rng, grid):
        return rng.standard_normal(grid.n_steps)

    def transform(self, draws, grid):
        steps = self.drift * grid.dt + self.volatility * np.sqrt(grid.dt) * draws
        values = np.empty((draws.shape[0], grid.n_points))
        values[:, 0] = self.initial_value
        values[:, 1:] = self.initial_value + np.cumsum(steps, axis=1)
        return values, values

    def parameters(self):
        return {"drift": self.drift, "volatility": self.volatility, "initial_value": self.initial_value}


class FractionalBrownianMotion(ProcessModel):
    kind = ModelKind.FBM
    is_markov = False
    is_gaussian = True
    exact_oracle = GAUSSIAN_LINEAR

    def __init__(self, hurst: float, method: str = "auto"):
        self.hurst = check_hurst(hurst)
        self.method = method
        self._synthesizers: Dict[int, FbmSynthesizer] = {}

    def synthesizer(self, grid: DyadicGrid) -> FbmSynthesizer:
        if grid.level not in self._synthesizers:
            self._synthesizers[grid.level] = FbmSynthesizer(self.hurst, grid.n_steps, self.method)
        return self._synthesizers[grid.level]

    def draw(self, rng, grid):
        return rng.standard_normal(self.synthesizer(grid).normals_per_path)

    def transform(self, draws, grid):
        values = self.synthesizer(grid).paths(draws)
        return values, values

    def synthesis_method(self, grid):
        return self.synthesizer(grid).method

    def parameters(self):
        return {"hurst": self.hurst, "method": self.method}


class CompensatedPoisson(ProcessModel):
    kind = ModelKind.COMPENSATED_POISSON

    def __init__(self, rate: float):
        if rate < 0:
            raise DomainError(f"Poisson rate must be non-negative, got {rate}")
        self.rate = float(rate)

    def draw(self, rng, grid):
        return rng.poisson(self.rate * grid.dt, grid.n_steps).astype(np.float64)

    def transform(self, draws, grid):
        values = np.zeros((draws.shape[0], grid.n_points))
        values[:, 1:] = np.cumsum(draws - self.rate * grid.dt, axis=1)
        return values, values

    def parameters(self):
        return {"rate": self.rate}


class SquaredBrownian(ProcessModel):
    """S = W**2 for a standard Brownian motion W; the filtration is that of W."""

    kind = ModelKind.SQUARED_BROWNIAN
    separate_history = True

    def draw(self, rng, grid):
        return rng.standard_normal(grid.n_steps)

    def transform(self, draws, grid):
        driver = np.zeros((draws.shape[0], grid.n_points))
        driver[:, 1:] = np.cumsum(np.sqrt(grid.dt) * draws, axis=1)
        return driver ** 2, driver


class OrnsteinUhlenbeck(ProcessModel):
    kind = ModelKind.ORNSTEIN_UHLENBECK
    is_gaussian = True

    def __init__(self, reversion: float, volatility: float = 1.0, initial_value: float = 0.0):
        if volatility < 0:
            raise DomainError(f"volatility must be non-negative, got {volatility}")
        if reversion < 0:
            raise DomainError(f"mean reversion must be non-negative, got {reversion}")
        self.reversion = float(reversion)
        self.volatility = float(volatility)
        self.initial_value = float(initial_value)

    def step_moments(self, h: float) -> Tuple[float, float]:
        """Exact one-step factor and conditional variance over a time step h."""
        factor = np.exp(-self.reversion * h)
        if self.reversion == 0:
            variance = self.volatility ** 2 * h
        else:
            variance = self.volatility ** 2 * (1 - np.exp(-2 * self.reversion * h)) / (2 * self.reversion)
        return float(factor), float(variance)

    def draw(self, rng, grid):
        return rng.standard_normal(grid.n_steps)

    def transform(self, draws, grid):
        factor, variance = self.step_moments(grid.dt)
        noise = np.sqrt(variance) * draws
        values = np.empty((draws.shape[0], grid.n_points))
        values[:, 0] = self.initial_value
        for i in range(grid.n_steps):
            values[:, i + 1] = factor * values[:, i] + noise[:, i]
        return values, values

    def parameters(self):
        return {"reversion": self.reversion, "volatility": self.volatility, "initial_value": self.initial_value}


FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda t: t,
    "square": lambda t: t ** 2,
    "sine": lambda t: np.sin(2 * np.pi * t),
}


class DeterministicFunction(ProcessModel):
    """A tabulated function f on D_m, sampled identically on every path."""

    kind = ModelKind.DETERMINISTIC

    def __init__(self, table: Sequence[float], name: Optional[str] = None):
        table = np.asarray(table, dtype=np.float64)
        level = np.log2(table.size - 1) if table.size > 1 else -1
        if level < 0 or level != int(level):
            raise DomainError(f"a tabulation needs 2**m + 1 values, got {table.size}")
        if not np.all(np.isfinite(table)):
            raise DomainError("tabulated function has non-finite values")
        self.table = table
        self.table_level = int(level)
        self.name = name
        self.initial_value = float(table[0])
        self.known_sup_bound = float(np.max(np.abs(table)))

    @classmethod
    def from_callable(cls, f: Callable[[np.ndarray], np.ndarray], level: int, name: Optional[str] = None):
        times = np.arange(2 ** level + 1) / 2 ** level
        return cls(f(times), name=name)

    @classmethod
    def named(cls, name: str, level: int):
        if name not in FUNCTIONS:
            raise DomainError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}")
        return cls.from_callable(FUNCTIONS[name], level, name=name)

    def draw(self, rng, grid):
        return np.empty(0)

    def transform(self, draws, grid):
        if grid.level > self.table_level:
            raise DomainError(
                f"function tabulated on D_{self.table_level} cannot be sampled on D_{grid.level}"
            )
        row = self.table[::2 ** (self.table_level - grid.level)]
        values = np.repeat(row[None, :], draws.shape[0], axis=0)
        return values, values

    def parameters(self):
        if self.name is not None:
            return {"function": self.name, "table_level": self.table_level}
        return {"table": self.table.tolist()}


TRUNCATABLE = (ModelKind.BROWNIAN, ModelKind.FBM, ModelKind.ORNSTEIN_UHLENBECK, ModelKind.COMPENSATED_POISSON)


class BoundedTruncation(ProcessModel):
    """
    clip(inner, -bound, bound), observed through the filtration of the inner path.
    """

    kind = ModelKind.BOUNDED_TRUNCATION
    is_markov = False
    separate_history = True

    def __init__(self, inner: ProcessModel, bound: float):
        if bound <= 0:
            raise DomainError(f"truncation bound must be positive, got {bound}")
        if inner.kind not in TRUNCATABLE:
            raise DomainError(f"cannot truncate a {inner.kind.value} model")
        self.inner = inner
        self.bound = float(bound)
        self.known_sup_bound = self.bound
        self.is_gaussian = inner.is_gaussian
        self.exact_oracle = inner.exact_oracle
        self.initial_value = float(np.clip(inner.initial_value, -self.bound, self.bound))

    def draw(self, rng, grid):
        return self.inner.draw(rng, grid)

    def transform(self, draws, grid):
        inner_values, _ = self.inner.transform(draws, grid)
        return np.clip(inner_values, -self.bound, self.bound), inner_values

    def synthesis_method(self, grid):
        return self.inner.synthesis_method(grid)

    def parameters(self):
        return {"inner": self.inner.describe(), "bound": self.bound}


def model_from_dict(spec: Dict) -> ProcessModel:
    """Inverse of ProcessModel.describe()."""
    spec = dict(spec)
    kind = ModelKind(spec.pop("kind"))
    if kind is ModelKind.BROWNIAN:
        return BrownianMotion(**spec)
    if kind is ModelKind.FBM:
        return FractionalBrownianMotion(**spec)
    if kind is ModelKind.COMPENSATED_POISSON:
        return CompensatedPoisson(**spec)
    if kind is ModelKind.SQUARED_BROWNIAN:
        return SquaredBrownian()
    if kind is ModelKind.ORNSTEIN_UHLENBECK:
        return OrnsteinUhlenbeck(**spec)
    if kind is ModelKind.DETERMINISTIC:
        if "function" in spec:
            return DeterministicFunction.named(spec["function"], spec["table_level"])
        return DeterministicFunction(spec["table"])
    return BoundedTruncation(model_from_dict(spec["inner"]), spec["bound"])
