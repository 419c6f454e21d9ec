"""
Scenario configuration: pydantic models for every section and a loader for
flat `dotted.key = value` files with command-line overrides.

    # fbm.cfg
    model.kind = fbm
    model.hurst = 0.75
    grid.levels = 4..10
    run.n_paths = 10000
    probe.family = lagged1,lagged2
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from grid_paths import MAX_LEVEL, DomainError, ModelKind, ProcessModel, model_from_dict

logger = logging.getLogger(__name__)

VERDICT_COMMANDS = ("probe", "riemann", "theorem1")
MIN_VERDICT_PATHS = 100
PROBE_MEMBERS = ("lagged1", "lagged2", "drift", "random")

# named flag -> dotted key
FLAG_KEYS = {
    "seed": "run.seed",
    "levels": "grid.levels",
    "paths": "run.n_paths",
    "epsilon": "run.epsilon",
    "workers": "run.workers",
    "out": "output.directory",
    "format": "output.format",
}


def parse_levels(value: Any) -> List[int]:
    """"4..12", "4,6,8", 7 or a list of ints."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, str):
        text = value.strip()
        if ".." in text:
            low, high = text.split("..", 1)
            return list(range(int(low), int(high) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    return [int(n) for n in value]


class ModelSection(BaseModel):
    """`kind` plus the constructor arguments of that model; `inner.*` keys describe a truncated model."""

    model_config = ConfigDict(extra="allow")

    kind: str = "brownian"

    @field_validator("kind")
    @classmethod
    def known_kind(cls, value: str) -> str:
        labels = [k.value for k in ModelKind]
        if value not in labels:
            raise ValueError(f"unknown model kind {value!r}; choose from {labels}")
        return value

    def spec(self, table_level: int) -> Dict:
        spec = {"kind": self.kind, **(self.model_extra or {})}
        if self.kind == ModelKind.DETERMINISTIC.value and "table" not in spec:
            spec.setdefault("function", "identity")
            spec.setdefault("table_level", table_level)
        return spec


class GridSection(BaseModel):
    levels: List[int] = Field(default_factory=lambda: list(range(4, 13)))
    fine_level: Optional[int] = Field(None, description="simulation level; defaults to max(levels)")

    @field_validator("levels", mode="before")
    @classmethod
    def expand(cls, value):
        return parse_levels(value)

    @field_validator("levels")
    @classmethod
    def within_cap(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("levels must not be empty")
        if min(value) < 0 or max(value) > MAX_LEVEL:
            raise ValueError(f"levels must lie in 0..{MAX_LEVEL}, got {value}")
        return sorted(set(value))

    @model_validator(mode="after")
    def fine_enough(self):
        if self.fine_level is not None and not max(self.levels) <= self.fine_level <= MAX_LEVEL:
            raise ValueError(f"fine_level must lie in {max(self.levels)}..{MAX_LEVEL}, got {self.fine_level}")
        return self

    @property
    def simulation_level(self) -> int:
        return max(self.levels) if self.fine_level is None else self.fine_level


class RunSection(BaseModel):
    seed: int = Field(0, ge=0, lt=2 ** 64)
    n_paths: int = Field(10_000, ge=1)
    epsilon: float = Field(0.1, gt=0.0, lt=1.0)
    workers: Optional[int] = Field(None, ge=1)


class OracleSection(BaseModel):
    kind: Literal["auto", "analytic", "gaussian-linear", "kernel-regression"] = "auto"
    bandwidth: PositiveFloat = 0.2


class ProbeSection(BaseModel):
    family: List[str] = Field(default_factory=lambda: list(PROBE_MEMBERS))

    @field_validator("family", mode="before")
    @classmethod
    def split(cls, value):
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("family")
    @classmethod
    def known_members(cls, value: List[str]) -> List[str]:
        unknown = sorted(set(value) - set(PROBE_MEMBERS))
        if unknown or not value:
            raise ValueError(f"probe family must be a non-empty subset of {PROBE_MEMBERS}, got {value}")
        return value


class ThresholdsSection(BaseModel):
    tau_conv: PositiveFloat = 0.02
    tau_div: PositiveFloat = 0.2
    bounded_exponent: PositiveFloat = 0.05
    unbounded_exponent: PositiveFloat = 0.15
    min_fit: float = Field(0.9, ge=0.0, le=1.0)
    # top share of the levels behind Cauchy verdicts and growth fits
    tail_fraction: float = Field(0.5, gt=0.0, le=1.0)
    domination_factor: float = Field(2.0, gt=1.0)

    @model_validator(mode="after")
    def ordered(self):
        if self.tau_conv >= self.tau_div:
            raise ValueError(f"tau_conv ({self.tau_conv}) must be below tau_div ({self.tau_div})")
        if self.bounded_exponent >= self.unbounded_exponent:
            raise ValueError("bounded_exponent must be below unbounded_exponent")
        return self


class MazurSection(BaseModel):
    window: int = Field(8, ge=1)


class OutputSection(BaseModel):
    directory: Path = Path("results")
    format: Literal["csv", "json"] = "csv"


class ScenarioConfig(BaseModel):
    """Everything a subcommand needs; re-running a command on the same config reproduces its files."""

    command: Optional[str] = None
    model: ModelSection = Field(default_factory=ModelSection)
    grid: GridSection = Field(default_factory=GridSection)
    run: RunSection = Field(default_factory=RunSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    probe: ProbeSection = Field(default_factory=ProbeSection)
    thresholds: ThresholdsSection = Field(default_factory=ThresholdsSection)
    mazur: MazurSection = Field(default_factory=MazurSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def consistent(self):
        if self.command in VERDICT_COMMANDS and self.run.n_paths < MIN_VERDICT_PATHS:
            raise ValueError(
                f"{self.command} produces a verdict and needs at least {MIN_VERDICT_PATHS} paths, "
                f"got {self.run.n_paths}"
            )
        if self.command in VERDICT_COMMANDS and len(self.grid.levels) < 3:
            raise ValueError(f"{self.command} needs at least 3 levels, got {self.grid.levels}")
        try:
            self.build_model()
        except (DomainError, TypeError, KeyError) as e:
            raise ValueError(f"invalid model section: {e}") from e
        return self

    def build_model(self) -> ProcessModel:
        return model_from_dict(self.model.spec(self.grid.simulation_level))

    def flat(self) -> Dict[str, Any]:
        """The dotted-key view, as written back next to every result."""
        return dict(flatten(self.model_dump(mode="json", exclude={"command"})))


def flatten(tree: Dict, prefix: str = "") -> Iterable:
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from flatten(value, dotted + ".")
        else:
            yield dotted, value


def parse_value(text: str) -> Any:
    """JSON scalars and lists; anything else stays a string."""
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_dotted(tree: Dict, key: str, value: Any) -> None:
    parts = key.split(".")
    if not all(parts):
        raise ValueError(f"malformed key {key!r}")
    node = tree
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ValueError(f"key {key!r} nests below the scalar {part!r}")
        node = child
    node[parts[-1]] = value


def read_flat_file(path: Path) -> Dict[str, Any]:
    entries: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = parse_value(value)
    return entries


def parse_overrides(tokens: Sequence[str]) -> Dict[str, Any]:
    """['--model.hurst', '0.75', '--grid.levels=4..8'] -> {'model.hurst': 0.75, 'grid.levels': '4..8'}"""
    overrides: Dict[str, Any] = {}
    tokens = list(tokens)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ValueError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens):
            value = tokens[i + 1]
            i += 2
        else:
            raise ValueError(f"missing value for {token}")
        overrides[key] = parse_value(value)
    return overrides


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    command: Optional[str] = None,
) -> ScenarioConfig:
    """
    File entries first, then overrides (dotted keys or the named flags of FLAG_KEYS).

    Raises:
        pydantic.ValidationError: for any invalid value
        ValueError: for a malformed file or override
    """
    entries = read_flat_file(Path(path)) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        entries[FLAG_KEYS.get(key, key)] = value
    tree: Dict[str, Any] = {}
    for key, value in entries.items():
        set_dotted(tree, key, value)
    tree["command"] = command
    config = ScenarioConfig.model_validate(tree)
    logger.debug(f"configuration: {config.flat()}")
    return config
