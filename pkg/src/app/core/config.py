import os
from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()
RUN_ENV: str = os.getenv("RUN_ENV", "").strip()


class Settings(BaseSettings):
    PROJECT_NAME: str = "rmt-kl-lab"
    DESCRIPTION: str = """
    Random-matrix laboratory
    - expected KL divergence of sample covariances and Oracle estimators
    - Monte Carlo validation of the closed forms
    - genetic-programming symbolic regression on the simulation data
    """
    VERSION: str = "0.1.0"

    def get_tool_version(self) -> dict:
        return {
            "title": self.PROJECT_NAME,
            "semver": self.VERSION,
        }

    # MONTE CARLO (desk scale)
    DIMENSION: int = 200
    REPLICATES: int = 100
    SEED: int = 42
    WORKERS: Optional[int] = None
    OUTPUT_DIR: str = "results"
    RECORD_WALLTIME: bool = False

    # FULL REPRODUCTION SCALE
    FULL_DIMENSION: int = 1000
    FULL_REPLICATES: int = 500
    FULL_GP_POPULATION: int = 50_000

    # GENETIC PROGRAMMING
    GP_POPULATION: int = 5_000
    GP_GENERATIONS: int = 40
    GP_PARSIMONY: float = 1e-4
    GP_TOURNAMENT_SIZE: int = 20
    GP_CROSSOVER_PROB: float = 0.9
    GP_MUTATION_PROB: float = 0.05
    GP_MAX_DEPTH: int = 8
    GP_INIT_DEPTH_MIN: int = 2
    GP_INIT_DEPTH_MAX: int = 6
    GP_ROUNDS: int = 4
    GP_RELATIVE_PARSIMONY: bool = True

    # VALIDATION
    VALIDATION_Z_MAX: float = 4.0
    VALIDATION_REL_TOL: float = 0.03

    def resolved_workers(self) -> int:
        return self.WORKERS or os.cpu_count() or 1

    model_config = SettingsConfigDict(
        env_file=".env", extra="ignore", case_sensitive=True
    )


settings = Settings()
