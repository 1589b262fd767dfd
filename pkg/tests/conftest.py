"""Pytest configuration and fixtures."""

import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from src.episodes.model import Episode, Relation, canonicalize, parse_episode
from src.episodes.stream import EventSequence

# Configure logging for tests
logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)

SEQUENCE_ONE = [
    ("A", 2),
    ("B", 3),
    ("A", 3),
    ("A", 7),
    ("C", 8),
    ("B", 9),
    ("D", 11),
    ("C", 12),
    ("A", 13),
    ("B", 14),
    ("C", 15),
]

SEQUENCE_THREE = [
    ("A", 1),
    ("B", 2),
    ("A", 3),
    ("D", 4),
    ("E", 5),
    ("C", 6),
    ("D", 7),
    ("A", 8),
    ("B", 9),
    ("B", 10),
    ("C", 12),
    ("D", 14),
]


@pytest.fixture
def sequence_one() -> EventSequence:
    """Provide the eleven-event stream with two occurrences of B before A and C.

    Returns:
        Event sequence over A, B, C, D.
    """
    return EventSequence.from_events(SEQUENCE_ONE)


@pytest.fixture
def sequence_three() -> EventSequence:
    """Provide the twelve-event stream used for expiry-time checks.

    Returns:
        Event sequence over A, B, C, D, E.
    """
    return EventSequence.from_events(SEQUENCE_THREE)


@pytest.fixture
def join_fixtures() -> dict[str, dict[str, Any]]:
    """Provide combinable episode pairs with their expected joins.

    Returns:
        Dictionary keyed by fixture name with ``a1``, ``a2`` and ``kinds``.
    """
    return {
        "all_three": {
            "a1": parse_episode("A B C D | B<A B<C D<C A<C A<D B<D"),
            "a2": parse_episode("A B C E | B<A B<C E<C A<C A<E B<E"),
            "kinds": {"Y0", "Y1", "Y2"},
        },
        "only_y1": {
            "a1": parse_episode("A B C D | B<A B<C D<C A<C"),
            "a2": parse_episode("A B C E | B<A B<C C<E A<C A<E B<E"),
            "kinds": {"Y1"},
        },
        "no_y2": {
            "a1": parse_episode("A B C D | B<A B<C D<C A<C"),
            "a2": parse_episode("A B C E | B<A B<C A<C A<E B<E"),
            "kinds": {"Y0", "Y1"},
        },
    }


@pytest.fixture
def embedded_patterns() -> dict[str, Episode]:
    """Provide the two six-node patterns embedded in the synthetic experiments.

    Returns:
        Dictionary with ``diamond`` (A then B, C then D, E then F) and
        ``tree`` (G then two branches).
    """
    return {
        "diamond": parse_episode("A B C D E F | A<B A<C B<D B<E C<D C<E D<F E<F"),
        "tree": parse_episode("G H I J K L | G<H G<I H<J H<K I<L"),
    }


def random_episode(rng: np.random.Generator, symbols: list[str], size: int, density: float = 0.4) -> Episode:
    """Random canonical episode: a random DAG over a random symbol subset, closed."""
    chosen = [symbols[k] for k in rng.choice(len(symbols), size=size, replace=False)]
    perm = rng.permutation(size)
    pairs = [
        (int(perm[a]), int(perm[b]))
        for a in range(size)
        for b in range(a + 1, size)
        if rng.random() < density
    ]
    return canonicalize(chosen, Relation.from_pairs(size, pairs).closure())


def random_stream(
    rng: np.random.Generator, symbols: list[str], length: int, max_gap: int = 2
) -> EventSequence:
    """Random stream whose ticks repeat often enough to exercise batches."""
    gaps = rng.integers(0, max_gap + 1, size=length)
    ticks = np.cumsum(gaps) + 1
    picks = rng.integers(0, len(symbols), size=length)
    return EventSequence.from_events((symbols[int(k)], int(t)) for k, t in zip(picks, ticks, strict=True))


@pytest.fixture
def rng() -> np.random.Generator:
    """Provide a seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_episode() -> Callable[..., Episode]:
    """Provide the random episode factory."""
    return random_episode


@pytest.fixture
def make_stream() -> Callable[..., EventSequence]:
    """Provide the random stream factory."""
    return random_stream


@pytest.fixture
def write_text(tmp_path: Path) -> Callable[[str, str], Path]:
    """Provide a helper writing a text file under ``tmp_path``.

    Returns:
        Function taking a file name and its content, returning the path.
    """

    def _write(name: str, content: str) -> Path:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return _write
