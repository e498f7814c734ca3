"""Exception hierarchy.

Everything a caller can fix by changing inputs derives from
:class:`ValidationError`; the CLI maps that family to exit code 1.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Inputs violate a documented precondition or invariant."""


class EmptyNetwork(ValidationError):
    pass


class MixedActivityKinds(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class _IndexedError(ValidationError):
    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"cluster {index}: {message}")


class BadBeta(_IndexedError):
    pass


class BadCount(_IndexedError):
    pass


class BadProbability(_IndexedError):
    pass


class BadSize(_IndexedError):
    pass


class WrongActivityKind(ValidationError):
    pass


class NoActivity(ValidationError):
    pass


class DegenerateQ(ValidationError):
    pass


class OriginMismatch(ValidationError):
    pass


class NonDecaying(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class PlanOutOfRange(ValidationError):
    pass
