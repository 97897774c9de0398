# src/config/settings.py
"""
執行設定 - 環境變數 (JOYCEKIT_*) 與每次執行的 RunConfig
"""

from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.config.config_loader import load_tolerances

Precision = Literal["double", "extended"]

SUBCOMMANDS = (
    "heavenly-check",
    "hk-verify",
    "lagrangian-check",
    "twistor",
    "stokes",
    "wallcross",
    "periods",
    "selftest",
)


class KitSettings(BaseSettings):
    """Process-wide settings; JOYCEKIT_PRECISION overrides the precision mode."""

    model_config = SettingsConfigDict(env_prefix="JOYCEKIT_", env_file=".env", extra="ignore")

    precision: Precision = "double"
    output_dir: Path = Path("out")
    seed: int = 20240601
    log_level: str = "WARNING"
    extended_dps: int = 30


class RunConfig(BaseModel):
    subcommand: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    options: Dict[str, object] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    precision: Precision = "double"
    output_dir: Path = Path("out")
    seed: int = 20240601

    @field_validator("subcommand")
    @classmethod
    def _known_subcommand(cls, v: str) -> str:
        if v not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand '{v}'")
        return v

    @field_validator("tolerances")
    @classmethod
    def _positive(cls, v: Dict[str, float]) -> Dict[str, float]:
        for name, value in v.items():
            if not value > 0:
                raise ValueError(f"tolerance '{name}' must be positive, got {value}")
        return v

    def resolved_tolerances(self) -> Dict[str, float]:
        return load_tolerances(self.tolerances)

    @classmethod
    def from_settings(
        cls,
        subcommand: str,
        *,
        settings: Optional[KitSettings] = None,
        inputs: Optional[Dict[str, str]] = None,
        options: Optional[Dict[str, object]] = None,
        tolerances: Optional[Dict[str, float]] = None,
        output_dir: Optional[Path] = None,
        seed: Optional[int] = None,
    ) -> "RunConfig":
        s = settings or KitSettings()
        return cls(
            subcommand=subcommand,
            inputs=inputs or {},
            options=options or {},
            tolerances=tolerances or {},
            precision=s.precision,
            output_dir=output_dir or s.output_dir,
            seed=s.seed if seed is None else seed,
        )


def tolerance_names() -> List[str]:
    return sorted(load_tolerances())
