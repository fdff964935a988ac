"""Configuration module for the Spectral Multiplier Lab"""
from .settings import settings
from .loader import (
    load_experiments,
    evaluate_expression,
    build_grid,
    build_fields,
    build_multiplier,
    build_weight
)

__all__ = [
    'settings',
    'load_experiments',
    'evaluate_expression',
    'build_grid',
    'build_fields',
    'build_multiplier',
    'build_weight'
]
