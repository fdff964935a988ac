"""
Exception hierarchy for the lab
Services raise these; the pipeline records them per experiment
"""


class SpectralLabError(Exception):
    """Base class for all lab errors"""


class GridError(SpectralLabError, ValueError):
    """Grid or stencil cannot be built as requested"""


class DimensionMismatchError(SpectralLabError, ValueError):
    """Arrays are not dimensioned to the grid they are used on"""


class EigensolverError(SpectralLabError):
    """Dense eigendecomposition did not converge"""


class CeilingExceededError(SpectralLabError):
    """Problem size exceeds the configured dense ceiling"""


class ResourceLimitError(SpectralLabError):
    """Not enough free memory for a dense allocation"""


class NegativeSpectrumError(SpectralLabError, ValueError):
    """Eigenvalues fall below the clamp tolerance"""


class CutoffIdentityError(SpectralLabError):
    """Dyadic partition of unity failed its self-test"""


class ParameterError(SpectralLabError, ValueError):
    """Parameters violate the hypothesis of the estimate being tested"""

    def __init__(self, message: str, hypothesis: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"{message} (hypothesis: {hypothesis})" if hypothesis else message)


class ScenarioConditionError(SpectralLabError):
    """A good-lambda scenario fails one of its ball conditions"""

    def __init__(self, condition: str, violation: float):
        self.condition = condition
        self.violation = violation
        super().__init__(f"Condition {condition} violated by {violation:.3e}")


class ReportError(SpectralLabError):
    """Report could not be written"""
