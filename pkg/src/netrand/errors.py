"""Exception types shared across the package."""


class NetrandError(Exception):
    """Base class for all package-specific errors."""


class UnknownParty(NetrandError):
    """A referenced party name does not resolve in the network."""


class AlreadyInterrupted(NetrandError):
    """Interruption requested on a scenario that is already interrupted."""


class DimensionMismatch(NetrandError):
    """Operator/state dimensions are inconsistent."""


class IncompleteProjectorSet(NetrandError):
    """A projector family is not a complete projective measurement."""


class InvalidCorrelators(NetrandError):
    """Correlator parameters produce a negative probability."""


class ParseError(NetrandError):
    """A data file could not be parsed."""


class NormalizationError(NetrandError):
    """A probability table does not sum to one."""


class SignalingError(NetrandError):
    """A probability table violates no-signaling; carries the offending marginal."""

    def __init__(self, message, party=None, deviation=None):
        super().__init__(message)
        self.party = party
        self.deviation = deviation


class ShapeMismatch(NetrandError):
    """Input dimensions do not match the expected scenario shape."""


class LevelTooLarge(NetrandError):
    """Inflation enumeration would exceed the configured resource cap."""


class IncompatibleInflations(NetrandError):
    """Inflations passed together do not share a scenario and level."""


class SolutionShapeMismatch(NetrandError):
    """An imported solution vector has the wrong length."""


class SolverFailure(NetrandError):
    """The backend solver returned a non-optimal status; carries the status."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status
