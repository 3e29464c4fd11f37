"""
Experiment configuration.

Values are layered: packaged ``settings/config.toml`` < a user TOML file with
the same tables < explicit command-line flags. The merged record is validated
by the pydantic model of the experiment.
"""

import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from importlib import resources
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Mapping, Optional, Type

from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from ..analysis.concentration import DEFAULT_BATCHES, parse_matrix_spec
from ..core.distributions import parse_distribution, parse_z_distribution
from ..core.errors import PreconditionError
from ..core.rng import UINT64_LIMIT
from ..utils.helpers import parse_d_rule, parse_grid

# Run options that never change numeric results; kept out of the report echo.
RUN_ONLY_FIELDS = frozenset({"threads", "out", "format", "timing", "log_level"})


class CommonConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(1, ge=0, lt=UINT64_LIMIT)
    reps: int = Field(1, ge=1)
    threads: int = Field(1, ge=1)
    max_p: int = Field(4096, ge=1)
    format: Literal["json", "csv"] = "json"
    out: Optional[str] = None
    timing: bool = False

    def echo(self) -> Dict[str, Any]:
        """Config fields that determine the numeric results."""
        return self.model_dump(mode="json", exclude=set(RUN_ONLY_FIELDS))


def _check_entry_law(value: str) -> str:
    parse_distribution(value)
    return value


def _check_z_law(value: str) -> str:
    parse_z_distribution(value)
    return value


def _check_rule(value: str) -> str:
    parse_d_rule(value)
    return value


def _check_matrix(value: str) -> str:
    parse_matrix_spec(value)
    return value


EntryLaw = Annotated[str, AfterValidator(_check_entry_law)]
MatrixSpec = Annotated[str, AfterValidator(_check_matrix)]
ZLaw = Annotated[str, AfterValidator(_check_z_law)]
OrderRule = Annotated[str, AfterValidator(_check_rule)]


class MpEsdConfig(CommonConfig):
    n: int = Field(40, ge=1)
    d: int = Field(2, ge=1)
    N: int = Field(1560, ge=1)
    dist: EntryLaw = "rademacher"
    bins: int = Field(100, ge=1)
    hist_scale: float = Field(1.2, gt=0)
    zero_tol: float = Field(1e-10, ge=0, lt=1)

    @model_validator(mode="after")
    def _d_le_n(self) -> "MpEsdConfig":
        if self.d > self.n:
            raise ValueError(f"d={self.d} exceeds n={self.n}")
        return self


class QformVarConfig(CommonConfig):
    n: int = Field(32, ge=1)
    d: int = Field(2, ge=1)
    dist: EntryLaw = "gaussian"
    matrix: List[MatrixSpec] = Field(default_factory=lambda: ["identity"])
    reps: int = Field(10_000, ge=100)
    batches: int = Field(20, ge=2)

    @field_validator("matrix", mode="before")
    @classmethod
    def _split_matrix(cls, value):
        if isinstance(value, str):
            return [v for v in value.split(",") if v]
        return value

    @model_validator(mode="after")
    def _check(self) -> "QformVarConfig":
        if self.d > self.n:
            raise ValueError(f"d={self.d} exceeds n={self.n}")
        if self.reps % self.batches:
            raise ValueError(
                f"reps={self.reps} must be divisible by batches={self.batches}"
            )
        return self


class EspLlnConfig(CommonConfig):
    z_dist: ZLaw = "exp"
    d_rule: OrderRule = "floor(n^0.3)"
    n_grid: List[int] = Field(default_factory=lambda: [500, 2000, 8000])
    reps: int = Field(50, ge=1)

    @field_validator("n_grid", mode="before")
    @classmethod
    def _grid(cls, value):
        grid = parse_grid(value)
        if grid[0] < 2:
            raise ValueError("esp-lln needs n >= 2")
        return grid


class GammaConfig(CommonConfig):
    n_max: int = Field(8, ge=1)
    d_max: int = Field(3, ge=1)
    bound_n_max: int = Field(12, ge=1)
    bound_d_max: int = Field(4, ge=1)


class ConditionsConfig(CommonConfig):
    dist: EntryLaw = "gaussian"
    z_dist: Optional[ZLaw] = None
    d_rule: OrderRule = "sqrt-over-log"
    n_grid: List[int] = Field(default_factory=lambda: [100, 1000, 10_000, 100_000])
    method: Optional[Literal["analytic", "monte_carlo"]] = None
    reps: int = Field(1_000_000, ge=40)

    @field_validator("n_grid", mode="before")
    @classmethod
    def _grid(cls, value):
        return parse_grid(value)

    @model_validator(mode="after")
    def _batches(self) -> "ConditionsConfig":
        if self.reps % DEFAULT_BATCHES:
            raise ValueError(
                f"reps={self.reps} must be divisible by {DEFAULT_BATCHES} batches"
            )
        return self


CONFIG_MODELS: Dict[str, Type[CommonConfig]] = {
    "mp-esd": MpEsdConfig,
    "qform-var": QformVarConfig,
    "esp-lln": EspLlnConfig,
    "gamma": GammaConfig,
    "conditions": ConditionsConfig,
}


def _table_name(experiment: str) -> str:
    return experiment.replace("-", "_")


def read_toml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise PreconditionError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise PreconditionError(f"invalid TOML in {path}: {exc}") from exc


def load_settings(user_file: Optional[Path] = None) -> Dict[str, Dict[str, Any]]:
    """Packaged settings, table by table overlaid with ``user_file``."""
    packaged = resources.files("tensor_mp.settings").joinpath("config.toml")
    settings: Dict[str, Dict[str, Any]] = tomllib.loads(packaged.read_text("utf-8"))
    if user_file is not None:
        for table, values in read_toml(Path(user_file)).items():
            if not isinstance(values, dict):
                raise PreconditionError(f"top-level key {table!r} must be a table")
            settings.setdefault(table, {}).update(values)
    return settings


def build_config(
    experiment: str,
    overrides: Optional[Mapping[str, Any]] = None,
    user_file: Optional[Path] = None,
) -> CommonConfig:
    """
    Merge the config layers for one experiment and validate them.

    Raises:
        PreconditionError: On unknown experiments or invalid values
    """
    if experiment not in CONFIG_MODELS:
        raise PreconditionError(f"unknown experiment {experiment!r}")
    model = CONFIG_MODELS[experiment]
    settings = load_settings(user_file)
    merged: Dict[str, Any] = {}
    merged.update(settings.get("experiment", {}))
    merged.update(settings.get(_table_name(experiment), {}))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model(**merged)
    except ValidationError as exc:
        raise PreconditionError(f"invalid {experiment} configuration: {exc}") from exc


def default_log_level(user_file: Optional[Path] = None) -> str:
    return str(load_settings(user_file).get("default", {}).get("log_level", "INFO"))


LOG_DIR_ENV = "TENSOR_MP_LOG_DIR"


def default_log_dir(user_file: Optional[Path] = None) -> Optional[Path]:
    """
    Directory for the rotating JSON log file, or None for stderr only.

    ``$TENSOR_MP_LOG_DIR`` overrides ``[default].log_dir``; an empty value
    disables the file.
    """
    value = os.environ.get(LOG_DIR_ENV)
    if value is None:
        value = load_settings(user_file).get("default", {}).get("log_dir")
    return Path(value) if value else None
