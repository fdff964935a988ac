"""
Utility modules for the Spectral Multiplier Lab
Contains helper functions, exceptions and monitoring tools
"""
from .helpers import (
    format_duration,
    parse_bool_env,
    create_run_id,
    extract_error_info,
    format_params,
    fit_growth_exponent,
    read_table,
    japanese_bracket,
)
from .exceptions import (
    SpectralLabError,
    GridError,
    DimensionMismatchError,
    EigensolverError,
    CeilingExceededError,
    ResourceLimitError,
    NegativeSpectrumError,
    CutoffIdentityError,
    ParameterError,
    ScenarioConditionError,
    ReportError,
)

__all__ = [
    # Helpers
    'format_duration',
    'parse_bool_env',
    'create_run_id',
    'extract_error_info',
    'format_params',
    'fit_growth_exponent',
    'read_table',
    'japanese_bracket',
    # Exceptions
    'SpectralLabError',
    'GridError',
    'DimensionMismatchError',
    'EigensolverError',
    'CeilingExceededError',
    'ResourceLimitError',
    'NegativeSpectrumError',
    'CutoffIdentityError',
    'ParameterError',
    'ScenarioConditionError',
    'ReportError',
]
