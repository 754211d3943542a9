import os
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from starfan.data.models import GenSpec

load_dotenv()


class Settings(BaseModel):
    """
    Process-wide knobs read from the environment (or a .env file).
    """

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    log_level: str = "INFO"
    typeb_max_dim: int = Field(default=6, ge=1, le=8)
    max_points: int = Field(default=20, ge=0)
    out_dir: str = "out"

    @field_validator("log_level")
    @classmethod
    def _upper(cls, value: str) -> str:
        return value.upper()

    @classmethod
    def from_env(cls) -> "Settings":
        raw = {
            "threads": os.getenv("STARFAN_THREADS"),
            "log_level": os.getenv("STARFAN_LOG_LEVEL"),
            "typeb_max_dim": os.getenv("STARFAN_TYPEB_MAX_DIM"),
            "max_points": os.getenv("STARFAN_MAX_POINTS"),
            "out_dir": os.getenv("STARFAN_OUT"),
        }
        return cls(**{k: v for k, v in raw.items() if v not in (None, "")})


class SolverOptions(BaseModel):
    """Stopping rules and feasibility guards for the likelihood maximizer."""

    tol: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=500, ge=1)
    floor: float = Field(default=1e-12, gt=0)
    radius: float = Field(default=1e6, gt=0)
    stall: float = Field(default=1e-14, ge=0)


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def reset_settings() -> None:
    """Forget the cached settings so the next call re-reads the environment."""
    global _settings
    _settings = None


class RunConfig(BaseModel):
    """Validated view of one CLI invocation."""

    command: str
    fan: Optional[str] = None
    data: Optional[str] = None
    gen: Optional[GenSpec] = None
    labels_variant: Optional[str] = None
    lambdas: List[float] = Field(default_factory=list)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    holdout: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    strict: bool = False
    out_dir: str = Field(default_factory=lambda: get_settings().out_dir)

    @field_validator("lambdas")
    @classmethod
    def _ascending(cls, value: List[float]) -> List[float]:
        if any(v <= 0 for v in value):
            raise ValueError("lambda values must be > 0")
        if any(b < a for a, b in zip(value, value[1:])):
            raise ValueError("lambda values must be sorted ascending")
        return value

    @model_validator(mode="after")
    def _one_source(self) -> "RunConfig":
        if self.command != "gen" and (self.data is None) == (self.gen is None):
            raise ValueError("give exactly one dataset source: --data or --gen")
        if self.labels_variant is not None and self.data != "builtin:line8":
            raise ValueError("--labels-variant only applies to builtin:line8")
        return self
