"""Exception hierarchy for the vines package."""


class VinesError(Exception):
    """Base class for all package errors."""


class DomainError(VinesError):
    """A physical parameter or state is outside its admissible domain."""


class ConfigError(VinesError):
    """A run configuration is malformed or inconsistent."""


class SimulationError(VinesError):
    """The integrator failed to produce a valid trajectory."""


class OptimizationError(VinesError):
    """The optimizer could not complete (budget, degenerate fitness, ...)."""
