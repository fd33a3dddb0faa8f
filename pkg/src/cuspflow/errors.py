"""Exception types shared across the package."""


class CuspFlowError(Exception):
    """Base class for all package errors."""


class NumericalFailure(CuspFlowError):
    """Raised when a computation breaks down (mapped to exit code 3 by the CLI)."""


class DegenerateMetricError(NumericalFailure):
    """A metric failed the positive-definiteness check at some node."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class PositivityLossError(DegenerateMetricError):
    """The flow produced a non positive-definite metric."""

    def __init__(self, message, time=None, nodes=None):
        super().__init__(message, nodes=nodes)
        self.time = time


class BlowupError(NumericalFailure):
    """Norms of the flow exceeded the blow-up threshold or became non-finite."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class IllPosedThresholdError(CuspFlowError, ValueError):
    """Re(omega) does not exceed the threshold -lambda(2 - lambda)."""


class DegenerateRootError(NumericalFailure):
    """A characteristic discriminant vanished, no decaying branch to select."""


class NearSingularError(NumericalFailure):
    """Pivot collapse in a resolvent factorization (omega near the discrete spectrum)."""


class UnderResolvedError(CuspFlowError, ValueError):
    """The grid does not resolve the requested mollifier scale."""


class NonpositiveNormError(CuspFlowError, ValueError):
    """A norm sample inside a fitting window is zero or negative."""


class SpectralError(NumericalFailure):
    """The dense eigensolver failed to converge."""


class PreconditionError(CuspFlowError, ValueError):
    """An input field violates a documented precondition."""


class ConfigError(CuspFlowError):
    """Configuration file problems. ``violations`` lists every problem found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
