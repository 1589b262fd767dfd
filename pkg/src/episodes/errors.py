"""
Exception hierarchy for episode mining.

Input problems derive from ``ValueError`` so callers that already guard
against bad values keep working. Broken internal invariants derive from
``RuntimeError``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.episodes.model import OrderVerdict


class EpisodeError(ValueError):
    """Base class for invalid episode input."""


class InjectivityError(EpisodeError):
    """An episode lists the same event-type twice."""


class PartialOrderError(EpisodeError):
    """A relation is not a strict partial order."""

    def __init__(self, message: str, verdict: OrderVerdict | None = None) -> None:
        super().__init__(message)
        self.verdict = verdict


class EpisodeSyntaxError(EpisodeError):
    """Episode text does not match the edge-list grammar."""


class CombineError(EpisodeError):
    """Two episodes cannot be joined into a larger candidate."""


class BlockStructureError(EpisodeError):
    """A candidate book has inconsistent block boundaries."""


class StreamError(ValueError):
    """Base class for invalid event streams."""


class StreamFormatError(StreamError):
    """A stream file line cannot be parsed."""


class UnsortedStreamError(StreamError):
    """Ticks in a stream decrease."""


class CandidateSizeError(ValueError):
    """Candidates handed to a single counting pass differ in size."""


class OracleGuardError(ValueError):
    """A brute-force instance exceeds the enumeration limits."""


class AutomatonInvariantError(RuntimeError):
    """The counter observed an impossible automaton configuration."""


__all__ = [
    "EpisodeError",
    "InjectivityError",
    "PartialOrderError",
    "EpisodeSyntaxError",
    "CombineError",
    "BlockStructureError",
    "StreamError",
    "StreamFormatError",
    "UnsortedStreamError",
    "CandidateSizeError",
    "OracleGuardError",
    "AutomatonInvariantError",
]
