"""Exception hierarchy shared across the package."""

from __future__ import annotations


class WayfarerError(Exception):
    """Base class for all package-specific errors."""


class DegenerateSegment(WayfarerError):
    """Two geographic points too close to define a direction."""


class OutOfFrameRange(WayfarerError):
    """Point beyond the validity range of the local tangent plane."""


class ParseError(WayfarerError):
    """A fixture/scenario document failed strict parsing.

    Carries the file and line so the CLI can point at the offending field.
    """

    def __init__(self, path: str, line: int | None, message: str):
        self.path = path
        self.line = line
        self.message = message
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class FixtureMissing(WayfarerError):
    """The fixture backend has no data covering the queried region."""


class NoRouteFound(WayfarerError):
    """No pedestrian route connects the requested endpoints."""


class NoCandidates(WayfarerError):
    """Destination selection was asked to choose from an empty candidate set."""


class IntentModelFailure(WayfarerError):
    """The intent-model adapter failed or returned a non-conforming response."""


class DecisionModelFailure(WayfarerError):
    """The joint-decision adapter failed or returned a non-conforming response."""


class PolicyFailure(WayfarerError):
    """The local trajectory policy adapter failed."""


class DegenerateRoute(WayfarerError):
    """Route too short or malformed to resample into waypoints."""


class EmptyBatch(WayfarerError):
    """Success rate requested for a batch with zero trials."""
