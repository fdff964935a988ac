"""
Centralized configuration management
Loads numerical defaults from environment variables
"""
import os
from pathlib import Path
from dotenv import load_dotenv
from src.utils.helpers import parse_bool_env
# Load environment variables from .env file
env_path = Path(__file__).parent.parent.parent / '.env'

if env_path.exists():
    load_dotenv(env_path)


class Settings:
    """Application settings loaded from environment variables"""
    # Dense linear algebra
    EIGEN_CEILING: int = int(os.getenv("EIGEN_CEILING", "4096"))
    CLAMP_TOLERANCE: float = float(os.getenv("CLAMP_TOLERANCE", "1e-8"))
    MEMORY_HEADROOM_GB: float = float(os.getenv("MEMORY_HEADROOM_GB", "0.5"))
    # Functional calculus
    CHEBYSHEV_MARGIN: float = float(os.getenv("CHEBYSHEV_MARGIN", "1e-3"))
    FINITE_SPEED_BUFFER: float = float(os.getenv("FINITE_SPEED_BUFFER", "0.25"))
    FINITE_SPEED_TOLERANCE: float = float(os.getenv("FINITE_SPEED_TOLERANCE", "1e-3"))
    # Heat kernel (rate denominator d of the Gaussian bound)
    GAUSSIAN_D: float = float(os.getenv("GAUSSIAN_D", "8"))
    # Multiplier norms
    CUTOFF_SAMPLE_RATE: int = int(os.getenv("CUTOFF_SAMPLE_RATE", "64"))
    MU_OCTAVES: int = int(os.getenv("MU_OCTAVES", "10"))
    MU_POINTS_PER_OCTAVE: int = int(os.getenv("MU_POINTS_PER_OCTAVE", "8"))
    FFT_WINDOW: float = float(os.getenv("FFT_WINDOW", "4"))
    FFT_PADDING: int = int(os.getenv("FFT_PADDING", "8"))
    # Weights
    WEIGHT_FLOOR: float = float(os.getenv("WEIGHT_FLOOR", "1e-30"))
    # Harness
    DEFAULT_TRIALS: int = int(os.getenv("DEFAULT_TRIALS", "20"))
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "12345"))
    REPORT_DIR: str = os.getenv("REPORT_DIR", "reports")
    REPORT_TIMINGS: bool = parse_bool_env(os.getenv("REPORT_TIMINGS"), default=True)
    SHOW_PROGRESS: bool = parse_bool_env(os.getenv("SHOW_PROGRESS"), default=False)
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: str = os.getenv("LOG_FILE", "logs/spectral_lab.log")

    def validate(self):
        """Validate numeric settings"""
        errors = []
        if self.EIGEN_CEILING < 2:
            errors.append("EIGEN_CEILING must be at least 2")
        if not 0 < self.CLAMP_TOLERANCE < 1:
            errors.append("CLAMP_TOLERANCE must lie in (0, 1)")
        if self.CHEBYSHEV_MARGIN < 0:
            errors.append("CHEBYSHEV_MARGIN must be nonnegative")
        if self.GAUSSIAN_D <= 0:
            errors.append("GAUSSIAN_D must be positive")
        if self.CUTOFF_SAMPLE_RATE < 64:
            errors.append("CUTOFF_SAMPLE_RATE must be at least 64")
        if self.MU_OCTAVES < 1 or self.MU_POINTS_PER_OCTAVE < 1:
            errors.append("MU_OCTAVES and MU_POINTS_PER_OCTAVE must be positive")
        if self.FFT_WINDOW < 2:
            errors.append("FFT_WINDOW must cover the support [1/2, 2]")
        if self.FFT_PADDING < 1:
            errors.append("FFT_PADDING must be at least 1")
        if not 0 < self.WEIGHT_FLOOR < 1:
            errors.append("WEIGHT_FLOOR must lie in (0, 1)")
        if self.DEFAULT_TRIALS < 1:
            errors.append("DEFAULT_TRIALS must be positive")
        if errors:
            raise ValueError(f"Configuration errors: {', '.join(errors)}")

    def __repr__(self):
        return (
            f"Settings("
            f"EIGEN_CEILING={self.EIGEN_CEILING}, "
            f"GAUSSIAN_D={self.GAUSSIAN_D}, "
            f"CUTOFF_SAMPLE_RATE={self.CUTOFF_SAMPLE_RATE}, "
            f"REPORT_DIR={self.REPORT_DIR})"
        )


# Create singleton instance
settings = Settings()
# Validate on import (can be disabled for testing)
if os.getenv("SKIP_CONFIG_VALIDATION") != "true":
    try:
        settings.validate()
    except ValueError as e:
        print(f"Configuration Error: {e}")
        print("Please check your .env file")
