from contextlib import contextmanager

from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    # Numerical linear algebra
    RANK_TOL: float = 1e-10
    GRAM_RANK_TOL: float = 1e-12
    JACOBI_MAX_SWEEPS: int = 50

    # Geometric validity thresholds (all relative to the natural scale of the quantity)
    DEGENERATE_VOLUME_TOL: float = 1e-9
    XI_TOL: float = 1e-9
    AREA_XI_TOL: float = 1e-8
    TAU_TOL: float = 1e-9
    OMEGA_TOL: float = 1e-8
    COMPLEMENTARY_TOL: float = 1e-8
    VANISH_TOL: float = 1e-7
    CLAMP_TOL: float = 1e-12

    # --- NEW: Experiment harness configuration ---
    ORBIT_MAX_ITER: int = 10_000
    ORBIT_RETURN_TOL: float = 1e-6
    ROOT_CLUSTER_TOL: float = 1e-6
    DEFAULT_SEED: int = 0
    DEFAULT_TRIALS: int = 100

    # --- NEW: Output document configuration ---
    SIGNIFICANT_DIGITS: int = 17
    SCHEMA_VERSION: str = "hedronometry/1"
    LOG_LEVEL: str = "INFO"

    # Pydantic v2 config to read from .env file
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

# Instantiate as a singleton to be imported across the app
settings = Settings()

# Fail Fast validation for values the numerics cannot work with
for _name in (
    "RANK_TOL", "GRAM_RANK_TOL", "DEGENERATE_VOLUME_TOL", "XI_TOL", "AREA_XI_TOL",
    "TAU_TOL", "OMEGA_TOL", "COMPLEMENTARY_TOL", "VANISH_TOL", "CLAMP_TOL",
    "ORBIT_RETURN_TOL", "ROOT_CLUSTER_TOL",
):
    if not getattr(settings, _name) > 0:
        raise RuntimeError(f"Tolerance {_name} must be positive")
if settings.JACOBI_MAX_SWEEPS < 1:
    raise RuntimeError("JACOBI_MAX_SWEEPS must be at least 1")
if settings.ORBIT_MAX_ITER < 1:
    raise RuntimeError("ORBIT_MAX_ITER must be at least 1")
if not 1 <= settings.SIGNIFICANT_DIGITS <= 17:
    raise RuntimeError("SIGNIFICANT_DIGITS must lie in 1..17")

# --- NEW: Per-invocation overrides (CLI --tol) ---
CLASSIFICATION_TOLS = ("XI_TOL", "TAU_TOL", "OMEGA_TOL", "COMPLEMENTARY_TOL", "VANISH_TOL")


@contextmanager
def overridden(**updates):
    """Temporarily replaces settings fields on the singleton, restoring them on exit."""
    unknown = [name for name in updates if name not in Settings.model_fields]
    if unknown:
        raise RuntimeError(f"Unknown settings {unknown}")
    for name, value in updates.items():
        if name.endswith("_TOL") and not value > 0:
            raise RuntimeError(f"Tolerance {name} must be positive")
    saved = {name: getattr(settings, name) for name in updates}
    for name, value in updates.items():
        setattr(settings, name, value)
    try:
        yield settings
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)
