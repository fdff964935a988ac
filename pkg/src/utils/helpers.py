"""
Helper utility functions
Common functions used across the services
"""
import uuid
from datetime import datetime
from typing import Any, Dict, Iterable, Optional, Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)


def format_duration(seconds: Optional[float]) -> str:
    """
    Format duration in seconds to human-readable string

    Args:
        seconds: Duration in seconds

    Returns:
        Human-readable duration string
    """
    if seconds is None:
        return "N/A"

    if seconds < 60:
        return f"{seconds:.1f} seconds"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.1f} minutes"
    else:
        hours = seconds / 3600
        return f"{hours:.1f} hours"


def parse_bool_env(env_value: Any, default: bool = False) -> bool:
    """
    Parse boolean environment variable

    Args:
        env_value: Environment variable value
        default: Default value if parsing fails

    Returns:
        Boolean value
    """
    if env_value is None:
        return default

    if isinstance(env_value, bool):
        return env_value

    if isinstance(env_value, str):
        return env_value.lower() in ['true', '1', 'yes', 'on', 'enabled']

    return default


def create_run_id(prefix: str = "RUN", date: Optional[datetime] = None) -> str:
    """
    Create a unique run ID

    Args:
        prefix: Prefix for the ID
        date: Optional date to include in ID

    Returns:
        Unique run ID
    """
    if date:
        return f"{prefix}-{date.strftime('%Y%m%d')}-{uuid.uuid4().hex[:8]}"
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def extract_error_info(error: Exception) -> dict:
    """
    Extract detailed information from an exception

    Args:
        error: Exception object

    Returns:
        Dictionary with error information
    """
    import traceback

    return {
        "error_type": type(error).__name__,
        "error_module": type(error).__module__,
        "error_message": str(error),
        "error_args": [str(arg) for arg in getattr(error, 'args', [])],
        "traceback": "".join(traceback.format_exception(type(error), error, error.__traceback__))
    }


def format_params(params: Dict[str, Any]) -> str:
    """
    Render a parameter mapping as a stable ``key=value;...`` string

    Keys are sorted so that the same parameters always give the same text.
    """
    parts = []
    for key in sorted(params):
        value = params[key]
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return ";".join(parts)


def fit_growth_exponent(xs: Iterable[float], ys: Iterable[float]) -> Tuple[float, float]:
    """
    Least-squares fit of ys ~ C * xs**beta on a log-log scale

    Args:
        xs: Positive abscissae, e.g. 1 + |y|
        ys: Positive measured values

    Returns:
        Tuple of (beta, C)
    """
    x = np.log(np.asarray(list(xs), dtype=float))
    y = np.log(np.asarray(list(ys), dtype=float))
    if x.size < 2:
        raise ValueError("At least two points are needed to fit an exponent")
    beta, intercept = np.polyfit(x, y, 1)
    return float(beta), float(np.exp(intercept))


def read_table(path: str, expected: Optional[int] = None) -> np.ndarray:
    """
    Read a plain-text table with one number per line (blank lines and # comments skipped)

    Args:
        path: Table file
        expected: Number of values required, if known

    Returns:
        Flat float array in file order
    """
    values = np.loadtxt(path, dtype=float, comments='#', ndmin=1).ravel()
    if expected is not None and values.size != expected:
        raise ValueError(f"{path} holds {values.size} values, expected {expected}")
    logger.debug(f"Read {values.size} values from {path}")
    return values


def japanese_bracket(r: np.ndarray) -> np.ndarray:
    """<r> = (1 + r^2)^{1/2} for magnitudes r"""
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + r * r)
