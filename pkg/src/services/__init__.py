"""
Services module for the Spectral Multiplier Lab
Operators, functional calculus, multiplier norms, weights, maximal functions and reports
"""
from .calculus_service import FunctionalCalculusService
from .lattice_service import LatticeService, kato_heat_constant, kato_threshold
from .norm_service import MultiplierNormService
from .weight_service import WeightService
from .maximal_service import MaximalService
from .scenario_service import ScenarioService
from .report_service import ReportFormat, ReportService

__all__ = [
    'FunctionalCalculusService',
    'LatticeService',
    'kato_heat_constant',
    'kato_threshold',
    'MultiplierNormService',
    'WeightService',
    'MaximalService',
    'ScenarioService',
    'ReportFormat',
    'ReportService'
]
