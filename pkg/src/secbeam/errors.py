"""Exception types shared across the package."""


class SecbeamError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SecbeamError):
    """A function was evaluated outside its mathematical domain."""


class ZeroBeamformer(SecbeamError):
    """An operation required a beamformer with nonzero power."""


class NonpositiveRate(SecbeamError):
    """A rate argument that must be positive was not."""


class NoBracket(SecbeamError):
    """Bracket expansion failed to find a sign change."""


class NoSignChange(SecbeamError):
    """Bisection was started on a bracket without a sign change."""


class DegenerateExpansion(SecbeamError):
    """A surrogate cannot be built at this expansion point."""


class GuardViolation(SecbeamError):
    """A numeric validity guard of an inner approximation failed.

    Carries the offending coefficient values in ``details``.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class InfeasibleStart(SecbeamError):
    """The warm start of a convex subproblem violates a constraint."""


class ConfigError(SecbeamError):
    """An experiment configuration is malformed."""
