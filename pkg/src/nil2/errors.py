"""Exception types shared across the package."""

from __future__ import annotations


class Nil2Error(Exception):
    """Base class for all package errors."""


class ResourceLimitError(Nil2Error):
    """An enumeration would exceed the element budget.

    Raised instead of silently truncating.  `needed` may be a lower bound
    when the exact size is not known in advance.
    """

    def __init__(self, message: str, needed: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget


class PresentationError(Nil2Error):
    """A polycyclic presentation is malformed or inconsistent."""


class PreconditionError(Nil2Error):
    """An operation's documented precondition does not hold.

    Carries a structured `witness` dict naming the violated condition.
    """

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}
