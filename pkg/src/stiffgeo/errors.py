"""Shared exception types."""


class StiffgeoError(Exception):
    """Base class for package errors."""


class DomainError(StiffgeoError):
    """A point, path or leaf leaves the open set where the structure lives.

    Raised instead of returning NaN when a potential vanishes, a point falls
    outside a canonical model, or a path crosses the boundary.
    """
