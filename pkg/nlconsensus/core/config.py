from pathlib import Path

from dotenv import load_dotenv
from pydantic import model_validator
from pydantic_settings import BaseSettings

# Explicitly load .env file
load_dotenv()

_PACKAGE_DIR = Path(__file__).resolve().parent.parent
_DEFAULT_PRESETS_DIR = _PACKAGE_DIR / "files" / "presets"

INTEGRATORS = ("rk4", "euler")


class Settings(BaseSettings):
    PROJECT_NAME: str = "Nonlinear Consensus Lab"

    # Simulation defaults (SimulationConfig falls back to these)
    DEFAULT_DT: float = 1e-3
    DEFAULT_T_MAX: float = 50.0
    DEFAULT_CONSENSUS_TOL: float = 1e-6
    DEFAULT_RECORD_EVERY: int = 10
    DEFAULT_INTEGRATOR: str = "rk4"
    DIVERGENCE_FACTOR: float = 1e6  # abort when |x| > factor * (1 + |x0|)

    # Numerical tolerances
    NULLSPACE_TOL: float = 1e-9  # relative to ||L||_inf
    LYAPUNOV_REL_TOL: float = 1e-9
    B_MATRIX_TOL: float = 1e-12
    H_ZERO_TOL: float = 1e-12
    QUAD_REL_TOL: float = 1e-10

    # Protocol certification
    MONOTONE_SAMPLES: int = 10_000
    RANGE_PADDING: float = 0.1

    # Reporting
    TAIL_FRACTION: float = 0.1

    # Paths
    OUTPUT_DIR: str = "runs"
    PRESETS_DIR: str = str(_DEFAULT_PRESETS_DIR)

    # App Settings
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    @model_validator(mode="after")
    def normalize_integrator(self) -> "Settings":
        """Integrator names are case-insensitive on input, lower case internally."""
        self.DEFAULT_INTEGRATOR = self.DEFAULT_INTEGRATOR.lower()
        if self.DEFAULT_INTEGRATOR not in INTEGRATORS:
            raise ValueError(
                f"DEFAULT_INTEGRATOR must be one of {INTEGRATORS}, got {self.DEFAULT_INTEGRATOR!r}"
            )
        return self

    class Config:
        env_file = ".env"
        extra = "ignore"


settings = Settings()
