import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name, '')
    if not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None


class Config:
    """Configuration class to manage all environment variables and settings"""

    # Spectral engine
    SPECTRAL_CAP = _int_env('GFZ_SPECTRAL_CAP', 5000)

    # Graph core
    ZERO_DEGREE_POLICY = os.getenv('GFZ_ZERO_DEGREE_POLICY', 'strict')

    # Storage and logging
    CACHE_DIR = os.getenv('GFZ_CACHE_DIR', '')
    LOG_DIR = os.getenv('GFZ_LOG_DIR', 'logs')
    LOG_LEVEL = os.getenv('GFZ_LOG_LEVEL', 'INFO')

    # Numerics
    DEFAULT_TOL = 1e-8
    SOLVER_RESIDUAL = 1e-10
    GRID_SIZE = 2000
    EXCLUSION_WINDOW = 0.05
    MAX_FIT_ITERATIONS = 50
    GDC_TAIL_MASS = 1e-9
    GDC_MAX_ORDER = 500

    # Bench workload
    BENCH_SEED = 42
    BENCH_DEGREE = 8
    BENCH_FEATURES = 16

    ZERO_DEGREE_POLICIES = ('strict', 'zero-row')

    @classmethod
    def validate_config(cls):
        """Validate that all settings are usable"""
        invalid = []
        if cls.SPECTRAL_CAP <= 0:
            invalid.append(f"GFZ_SPECTRAL_CAP={cls.SPECTRAL_CAP} must be positive")
        if cls.ZERO_DEGREE_POLICY not in cls.ZERO_DEGREE_POLICIES:
            invalid.append(f"GFZ_ZERO_DEGREE_POLICY={cls.ZERO_DEGREE_POLICY!r} must be one of "
                           f"{'/'.join(cls.ZERO_DEGREE_POLICIES)}")

        if invalid:
            raise ValueError(f"Invalid configuration values: {'; '.join(invalid)}")

        return True
