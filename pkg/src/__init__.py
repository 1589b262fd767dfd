"""
Frequent injective episode mining.

This package mines frequent partial-order episodes from event streams,
counts non-overlapped occurrences with finite-state automata and scores
episodes by bidirectional evidence.
"""

__version__ = "0.1.0"

from src.episodes.model import Episode, format_episode, parse_episode
from src.episodes.stream import EventSequence, read_stream
from src.mining.miner import HMode, MiningConfig, mine

# Tracing utilities
from src.tracing import (
    MiningAttributes,
    add_span_attribute,
    get_tracer,
    record_exception,
    setup_tracing,
    traced,
)

__all__ = [
    "Episode",
    "EventSequence",
    "HMode",
    "MiningConfig",
    "format_episode",
    "mine",
    "parse_episode",
    "read_stream",
    # Tracing
    "setup_tracing",
    "get_tracer",
    "traced",
    "add_span_attribute",
    "record_exception",
    "MiningAttributes",
]
