"""
Experiment Configuration - typed run settings loaded from files and flags.

Config files are either YAML/JSON documents or flat ``key=value`` text files.
Command-line overrides win over file values.
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator

from .errors import ConfigError

# Configuration constants
OUTPUT_ENV_VAR = "SPACETIME_TT_OUT"
DEFAULT_OUTPUT = "results.csv"
FILE_ENCODING = "utf-8"
YAML_SUFFIXES = (".yaml", ".yml", ".json")

EPS_TT_DEFAULTS = {
    "exp1": 1e-8,
    "manufactured": 1e-5,
    "burgers": 1e-5,
}
N_DEFAULTS = {
    "exp1": [16],
    "manufactured": [8, 12, 16],
    "burgers": [8, 12, 16],
}

Experiment = Literal["exp1", "manufactured", "burgers"]
SolverVariant = Literal["fullgrid", "tt-fixed-eps", "tt-step-trunc"]
SOLVER_VARIANTS = ("fullgrid", "tt-fixed-eps", "tt-step-trunc")


class ExperimentConfig(BaseModel):
    """
    Settings of one ``run`` invocation.

    ``N`` lists collocation points per dimension (mode size for exp1).
    ``eps_tt`` is the fixed tolerance of tt-fixed-eps and, unless
    ``eps_floor`` is given, the floor of tt-step-trunc; ``eps0`` is the
    starting tolerance of tt-step-trunc. ``krylov_*`` settings drive the
    dense GMRES, ``tt_krylov_*`` the TT-GMRES.
    """

    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    solver: List[SolverVariant] = Field(default_factory=lambda: list(SOLVER_VARIANTS))
    N: Optional[List[int]] = None
    eps_tt: Optional[float] = Field(default=None, gt=0)
    eps_cross: Optional[float] = Field(default=None, gt=0)
    eps0: float = Field(default=1e-1, gt=0)
    eps_floor: Optional[float] = Field(default=None, gt=0)
    tol_res: float = Field(default=1e-6, gt=0)
    tol_update: float = Field(default=1e-6, gt=0)
    max_newton: int = Field(default=20, ge=1)
    krylov_restart: int = Field(default=50, ge=1)
    krylov_max_iter: int = Field(default=1000, ge=1)
    tt_krylov_restart: int = Field(default=30, ge=1)
    tt_krylov_max_iter: int = Field(default=150, ge=1)
    seed: int = 0
    out: Optional[Path] = None
    parallel: bool = False

    @field_validator("solver", "N", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        if isinstance(value, (int, float)):
            return [value]
        return value

    @field_validator("N")
    @classmethod
    def _check_points(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and any(n < 3 for n in value):
            raise ValueError("every N must be at least 3")
        return value

    @property
    def sizes(self) -> List[int]:
        return self.N if self.N else list(N_DEFAULTS[self.experiment])

    @property
    def tt_tolerance(self) -> float:
        return self.eps_tt if self.eps_tt is not None else EPS_TT_DEFAULTS[self.experiment]

    @property
    def truncation_floor(self) -> float:
        """Lower bound of eps_k for tt-step-trunc."""
        return self.eps_floor if self.eps_floor is not None else self.tt_tolerance

    @property
    def cross_tolerance(self) -> float:
        return self.eps_cross if self.eps_cross is not None else self.tt_tolerance

    @property
    def output_path(self) -> Path:
        if self.out is not None:
            return Path(self.out)
        return Path(os.getenv(OUTPUT_ENV_VAR, DEFAULT_OUTPUT))


def parse_key_value(text: str) -> Dict[str, str]:
    """Parse a flat ``key=value`` file; blank lines and ``#`` comments are ignored."""
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Line {number} is not of the form key=value: {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def read_config_file(path: Path) -> Dict[str, Any]:
    """Raw settings from a config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding=FILE_ENCODING)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    if path.suffix.lower() in YAML_SUFFIXES:
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Malformed config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping")
        return data
    return parse_key_value(text)


def load_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from an optional file plus overrides.

    Args:
        path: Config file (YAML/JSON or key=value)
        overrides: Settings that take precedence; ``None`` values are ignored

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: Unknown keys or invalid values
    """
    settings: Dict[str, Any] = read_config_file(path) if path is not None else {}
    settings.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig(**settings)
    except PydanticValidationError as e:
        fields = [".".join(str(p) for p in err["loc"]) for err in e.errors()]
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"Invalid configuration: {details}", fields) from e
