"""
Pipeline module for the Spectral Multiplier Lab
Experiment handlers and the concurrent run orchestration
"""
from .experiments import ExperimentRunner
from .runner import ExperimentPipeline

__all__ = [
    'ExperimentRunner',
    'ExperimentPipeline'
]
