"""
Error hierarchy for the jump-channel statistics engine
Subclasses builtin ValueError/RuntimeError so plain `except ValueError` callers keep working
"""


class JumpStatsError(Exception):
    """Base class for all engine errors"""


class ConfigError(JumpStatsError, ValueError):
    """Invalid run configuration, model parameters or CLI input"""


class DimensionError(JumpStatsError, ValueError):
    """Matrix shapes do not match the requested operation"""


class UnknownSymbolError(JumpStatsError, ValueError):
    """A symbol outside the monitored alphabet was supplied"""


class UnsupportedModelError(JumpStatsError, ValueError):
    """Operation precondition on the model is not met (e.g. partial monitoring)"""


class InsufficientDataError(JumpStatsError, ValueError):
    """Not enough sampled symbols/states for the requested estimate"""


class NumericError(JumpStatsError, RuntimeError):
    """Numerical failure: non-convergence, tolerance violations, inconsistencies"""

    def __init__(self, message: str, residual: float = None):
        super().__init__(message)
        self.residual = residual


class DegeneracyError(NumericError):
    """Kernel dimension differs from one (non-unique steady state)"""


class DarkSubspaceError(DegeneracyError):
    """No-jump generator is singular: some subspace never emits a monitored jump"""


class SingularMatrixError(NumericError):
    """Exact elimination met a zero pivot with no row exchange available"""


class ConditioningError(NumericError):
    """Conditioning on a zero-probability history"""


class EnumerationCapError(JumpStatsError):
    """Tuple enumeration would exceed the configured cap"""


class PatternClosureError(JumpStatsError):
    """Breadth-first pattern closure exceeded its state budget"""

    def __init__(self, message: str, graph=None):
        super().__init__(message)
        self.graph = graph
