from dotenv import load_dotenv
from pydantic_settings import BaseSettings
from typing import Optional


load_dotenv()  # Loads variables from .env

class Settings(BaseSettings):
    # App settings
    APP_NAME: str = "Ensembles"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Budgets (finite-stage rendering of "may diverge" and r.e. enumerations)
    scan_budget: int = 10_000_000
    level_size_budget: int = 100_000
    oracle_query_budget: int = 1_000_000
    max_sampling_width: int = 1 << 20

    # Truncation of countable alphabets
    truncation_epsilon_exponent: int = 40  # tail bound target 2^-40
    default_truncation_width: int = 8

    # Sampling
    sample_block_size: int = 65_536

    # Statistics
    default_k_sigma: float = 4.0
    chi2_significance: float = 1e-4
    equivalence_epsilon: float = 1e-3
    independence_threshold: float = 0.01

    class Config:
        env_file = ".env"
        extra = "allow"

# Create global settings instance
settings = Settings()
