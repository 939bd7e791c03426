"""Exception types shared across the package."""


class DephnetError(Exception):
    """Base class for all package-specific errors."""


class GraphConstructionError(DephnetError, ValueError):
    """Invalid graph input: bad endpoint, duplicate edge, self-loop, or
    a disconnected result."""


class CircuitFileError(DephnetError, ValueError):
    """Malformed circuit definition file."""


class UnknownCircuitError(DephnetError, ValueError):
    """A builtin circuit name that is not in the registry."""


class CalibrationNotRunError(DephnetError, RuntimeError):
    """A calibrated constructor was asked for a topology whose definition
    file carries no record of a completed calibration."""


class CalibrationError(DephnetError, ValueError):
    """Empty candidate family or a target that no candidate can satisfy."""


class DimensionMismatchError(DephnetError, ValueError):
    """State dimension does not match the generator."""


class UnsupportedFormError(DephnetError, TypeError):
    """Operation not defined for this generator form (the explicit-bath
    form is affine only after clamping, so it has no matrix form)."""


class PhysicalityError(DephnetError, ValueError):
    """A state violated Hermiticity or positivity beyond tolerance."""


class UnphysicalSolutionError(DephnetError, RuntimeError):
    """The stationary linear system is solvable to tolerance but the
    solution is not a physical density matrix (rank-deficient case,
    reported distinctly from a genuine divergence verdict)."""


class IndeterminateResultError(DephnetError, RuntimeError):
    """A transport quantity was requested from a solve that hit its time
    cutoff without either converging or diverging."""


class NoSignChangeError(DephnetError, ValueError):
    """Bisection bracket does not straddle a sign change."""


class TrajectoryTooShortError(DephnetError, ValueError):
    """Divergence detection needs at least two analysis windows."""


class IntegrationError(DephnetError, RuntimeError):
    """The ODE integrator failed (for example step-size underflow)."""


class UsageError(DephnetError, ValueError):
    """Bad command line or config-file input."""
