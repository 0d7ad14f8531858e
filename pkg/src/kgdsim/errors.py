"""Exception hierarchy for the simulator."""


class KgdsimError(Exception):
    """Base class for all simulator errors."""


class InputError(KgdsimError, ValueError):
    """Invalid argument to a numerical routine (non-finite, out of domain, ...)."""


class ConfigError(KgdsimError, ValueError):
    """Invalid scenario configuration. CLI maps this to exit code 2."""


class NumericalError(KgdsimError, RuntimeError):
    """A numerical procedure failed (non-convergent solve, singular system, ...)."""


class NonConvergenceError(NumericalError):
    """Fixed-point coupling loop did not converge. CLI maps this to exit code 3."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PhysicalStateError(KgdsimError, RuntimeError):
    """Computed state violates a physical admissibility condition (e.g. crack
    face interpenetration or front recession)."""
