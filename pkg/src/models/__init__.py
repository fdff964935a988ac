"""
Data models for the Spectral Multiplier Lab
Defines the data structures shared by the services and the pipeline
"""
from .lattice import (
    Boundary,
    OperatorKind,
    Grid,
    FieldSpec,
    LatticeOperator,
    HeatKernelReport
)
from .cutoffs import DyadicCutoffs, bump_psi, dyadic_phi
from .multiplier import MultiplierKind, MultiplierFn
from .calculus import (
    SpectralDecomposition,
    KernelMatrix,
    FiniteSpeedReport,
    ChebyshevConvergence,
    RescalingReport
)
from .norms import MuEstimate, SobolevMajorant, PredictedConstants
from .weights import (
    Cube,
    Weight,
    ApReport,
    RHReport,
    FactorizationResult,
    MuckenhouptWheedenReport,
    default_cube_family
)
from .decomposition import (
    MaximalShape,
    Ball,
    CZDecomposition,
    GoodLambdaParameters,
    GoodLambdaScenario,
    ScenarioAudit,
    GoodLambdaReport,
    RecurrenceReport,
    LocalizationReport,
    WeakTypeReport
)
from .experiment import (
    ExperimentId,
    GridConfig,
    FieldConfig,
    MultiplierConfig,
    WeightKind,
    WeightConfig,
    ExperimentConfig,
    ReportRow
)
from .run_state import RunStatus, ExperimentState, RunState

__all__ = [
    # Lattice models
    'Boundary',
    'OperatorKind',
    'Grid',
    'FieldSpec',
    'LatticeOperator',
    'HeatKernelReport',
    # Cutoffs and multipliers
    'DyadicCutoffs',
    'bump_psi',
    'dyadic_phi',
    'MultiplierKind',
    'MultiplierFn',
    # Functional calculus
    'SpectralDecomposition',
    'KernelMatrix',
    'FiniteSpeedReport',
    'ChebyshevConvergence',
    'RescalingReport',
    # Norms
    'MuEstimate',
    'SobolevMajorant',
    'PredictedConstants',
    # Weights
    'Cube',
    'Weight',
    'ApReport',
    'RHReport',
    'FactorizationResult',
    'MuckenhouptWheedenReport',
    'default_cube_family',
    # Maximal functions and good-lambda
    'MaximalShape',
    'Ball',
    'CZDecomposition',
    'GoodLambdaParameters',
    'GoodLambdaScenario',
    'ScenarioAudit',
    'GoodLambdaReport',
    'RecurrenceReport',
    'LocalizationReport',
    'WeakTypeReport',
    # Experiments
    'ExperimentId',
    'GridConfig',
    'FieldConfig',
    'MultiplierConfig',
    'WeightKind',
    'WeightConfig',
    'ExperimentConfig',
    'ReportRow',
    # Run state
    'RunStatus',
    'ExperimentState',
    'RunState'
]
