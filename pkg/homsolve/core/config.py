from typing import Any, Dict, Optional
from pathlib import Path
from pydantic import Field, field_validator, ConfigDict
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    APP_NAME: str = "homsolve"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"

    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FORMAT: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s", description="Log format")
    LOG_JSON: bool = Field(default=False, description="Emit JSON log records")
    LOG_FILE: Optional[Path] = Field(default=None, description="Optional log file path")

    DEFAULT_REGIME: str = Field(default="exact", description="Scalar regime used when a document does not name one")
    FLOAT_OVERFLOW_THRESHOLD: float = Field(default=1e100, description="Float magnitudes above this raise overflow")
    EXACT_MAX_BITS: int = Field(default=1_000_000, description="Bit-size budget for exact numerators/denominators")

    NEWTON_TOL: float = Field(default=1e-12, description="Newton tolerance, relative to 1+|Z|")
    NEWTON_MAX_ITER: int = Field(default=50, description="Newton iteration limit")
    NEWTON_MAX_HALVINGS: int = Field(default=30, description="Step halvings per Newton iteration")
    NEWTON_SINGULAR_COND: float = Field(default=1e14, description="Condition number above which the Jacobian is singular")

    VERIFY_TOL: float = Field(default=1e-9, description="Relative tolerance for float-regime verification")
    VERIFY_HORIZON: int = Field(default=5, description="Default verification horizon")

    EXAMPLE_SEED: int = Field(default=2021, description="Seed for the built-in N=2, M=4 example")
    EXAMPLE_HORIZON: int = Field(default=4, description="Verification horizon of the built-in example")

    GENERATOR_DENOMINATOR_BITS: int = Field(default=8, description="Exact generator draws k/2**bits")
    CSV_DIGITS: int = Field(default=17, description="Significant digits for exact values in CSV output")
    BATCH_WORKERS: int = Field(default=1, description="Worker processes for batch verification")

    @field_validator("ENVIRONMENT")
    @classmethod
    def validate_environment(cls, v: str) -> str:
        allowed = ["development", "test", "production"]
        if v.lower() not in allowed:
            raise ValueError(f"ENVIRONMENT must be one of {allowed}")
        return v.lower()

    @field_validator("DEFAULT_REGIME")
    @classmethod
    def validate_regime(cls, v: str) -> str:
        if v.lower() not in ("exact", "float"):
            raise ValueError("DEFAULT_REGIME must be 'exact' or 'float'")
        return v.lower()

    @field_validator("EXACT_MAX_BITS", "NEWTON_MAX_ITER", "BATCH_WORKERS", "GENERATOR_DENOMINATOR_BITS")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be positive")
        return v

    def newton_defaults(self) -> Dict[str, Any]:
        return {
            "tol": self.NEWTON_TOL,
            "max_iter": self.NEWTON_MAX_ITER,
            "max_halvings": self.NEWTON_MAX_HALVINGS,
        }

    model_config = ConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
