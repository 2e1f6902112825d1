"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class EmptyInput(EngineError):
    """The diff text contained no lines at all."""


class UnknownGroup(EngineError):
    """A substitution or candidate referenced a group id that does not exist."""


class InvalidReplacement(EngineError):
    """A replacement token was empty or contained whitespace."""


class AdapterUnavailable(EngineError):
    """A remote model adapter could not be reached or died mid-conversation."""


class MalformedResponse(EngineError):
    """A model server reply violated the wire protocol."""


class InvalidCandidate(EngineError):
    """A search candidate carried an empty perturbation domain."""


class EmptyExplore(EngineError):
    """choose() was called with nothing left to explore."""


class InvalidParams(EngineError):
    """Instance generator parameters outside the supported range."""


class TooLarge(EngineError):
    """The instance has too many groups for exhaustive enumeration."""
