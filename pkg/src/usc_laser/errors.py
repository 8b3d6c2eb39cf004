"""Exception hierarchy shared by the solver, dynamics and I/O layers."""


class USCLaserError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(USCLaserError, ValueError):
    """A physical parameter violates its admissible range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverError(USCLaserError):
    """Base class for root-finding failures."""


class NoConvergence(SolverError):
    pass


class CollapsedToTrivial(SolverError):
    """Newton iteration drove the field amplitude to zero."""


class NonphysicalRoot(SolverError):
    """Converged root has a non-positive oscillation frequency."""


class NoThreshold(SolverError):
    """No lasing onset is reachable with a pump level of at most 1/2."""


class GridMismatch(USCLaserError, ValueError):
    pass


class DynamicsError(USCLaserError):
    pass


class NumericalBlowup(DynamicsError):
    pass


class NoRelaxation(DynamicsError):
    pass


class FrameMismatch(DynamicsError):
    """Amplitudes settled but the phase keeps rotating in the chosen frame.

    ``omega_estimate`` is the frame frequency corrected by the measured
    phase drift, a good starting point for a harmonic-balance re-solve.
    """

    def __init__(self, message, omega_estimate):
        self.omega_estimate = omega_estimate
        super().__init__(message)


class ConfigError(USCLaserError, ValueError):
    """Malformed run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message, line=None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}: {message}{where}")
