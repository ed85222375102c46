"""
Exception hierarchy for the forkpool packages.

Every violated precondition raises a DomainError. It subclasses ValueError so
callers that only catch ValueError keep working.
"""

from typing import List, Optional


class DomainError(ValueError):
    """Raised when an input violates a model invariant or precondition."""


class ConfigError(DomainError):
    """Raised for malformed or inconsistent run configurations."""


class SchemaError(DomainError):
    """Raised when a CSV file does not carry the expected header."""


class InconsistentConditionsError(DomainError):
    """
    Raised when both two-pool vertex conditions hold at once.

    Attributes:
        candidates (List[int]): Indices of the vertices that both satisfy
            their stability condition.
    """

    def __init__(self, message: str, candidates: Optional[List[int]] = None):
        super().__init__(message)
        self.candidates = list(candidates or [])


class NumericalFailureError(DomainError):
    """Raised when a numerical procedure finds no admissible answer."""
