"""Tests for the brute-force reference counts."""

from collections.abc import Callable

import numpy as np
import pytest
from src.episodes.errors import OracleGuardError
from src.episodes.model import Episode, parse_episode
from src.episodes.stream import EventSequence
from src.oracle import (
    Occurrence,
    enumerate_all_episodes,
    enumerate_occurrences,
    exhaustive_nonoverlapped,
    greedy_nonoverlapped,
    max_nonoverlapped,
)


@pytest.mark.unit
class TestEnumerateOccurrences:
    """Tests for occurrence enumeration."""

    def test_fork_on_sequence_one(self, sequence_one: EventSequence) -> None:
        """Test that B before A and C is found at (B, A, C) but not with A tied to B."""
        alpha = parse_episode("A B C | B<A B<C")
        found = enumerate_occurrences(alpha, sequence_one)
        sorted_sets = {occ.sorted_indices for occ in found}

        assert (1, 3, 4) in sorted_sets
        assert all(occ.indices[0] != 2 or occ.indices[1] != 1 for occ in found)
        assert found == sorted(found)

    def test_each_occurrence_respects_order(self, sequence_three: EventSequence) -> None:
        """Test ticks and event-types of every enumerated occurrence."""
        alpha = parse_episode("A B C D | A<C A<D B<C B<D")
        ticks = sequence_three.ticks
        for occ in enumerate_occurrences(alpha, sequence_three, 6):
            for i, j in alpha.edges():
                assert ticks[occ.indices[i]] < ticks[occ.indices[j]]
            assert [sequence_three.symbol_at(k) for k in occ.indices] == list(alpha.events)
            assert occ.end - occ.start <= 6

    def test_absent_symbol(self, sequence_one: EventSequence) -> None:
        """Test that a missing event-type has no occurrences."""
        assert enumerate_occurrences(Episode.serial("AZ"), sequence_one) == []

    def test_empty_stream(self) -> None:
        """Test counts on the empty stream."""
        alpha = Episode.serial("AB")

        assert max_nonoverlapped(alpha, EventSequence.empty()) == 0
        assert max_nonoverlapped(alpha, EventSequence.empty(), method="window") == 0


@pytest.mark.unit
class TestNonOverlapped:
    """Tests for the maximum non-overlapped count."""

    def test_known_counts(self, sequence_one: EventSequence, sequence_three: EventSequence) -> None:
        """Test both methods on the hand-checked streams."""
        fork = parse_episode("A B C | B<A B<C")
        bipartite = parse_episode("A B C D | A<C A<D B<C B<D")

        for method in ("enumerate", "window"):
            assert max_nonoverlapped(fork, sequence_one, method=method) == 2
            assert max_nonoverlapped(bipartite, sequence_three, method=method) == 2
            assert max_nonoverlapped(bipartite, sequence_three, 4, method=method) == 1

    def test_greedy_is_optimal(
        self,
        rng: np.random.Generator,
        make_episode: Callable[..., Episode],
        make_stream: Callable[..., EventSequence],
    ) -> None:
        """Test the greedy against subset search on small occurrence lists."""
        checked = 0
        for _ in range(300):
            alpha = make_episode(rng, list("ABC"), int(rng.integers(2, 4)))
            stream = make_stream(rng, list("ABCD"), int(rng.integers(6, 14)))
            found = enumerate_occurrences(alpha, stream, 4)
            if len(found) > 16:
                continue
            checked += 1
            chosen = greedy_nonoverlapped(found)
            assert len(chosen) == exhaustive_nonoverlapped(found)
            assert all(a.end < b.start for a, b in zip(chosen, chosen[1:], strict=False))

        assert checked > 50

    def test_methods_agree(
        self,
        rng: np.random.Generator,
        make_episode: Callable[..., Episode],
        make_stream: Callable[..., EventSequence],
    ) -> None:
        """Test that both counting methods agree."""
        for trial in range(200):
            alpha = make_episode(rng, list("ABCD"), int(rng.integers(2, 5)), float(rng.random()))
            stream = make_stream(rng, list("ABCD"), int(rng.integers(10, 30)))
            expiry = [2, 5, None][trial % 3]

            assert max_nonoverlapped(alpha, stream, expiry) == max_nonoverlapped(
                alpha, stream, expiry, method="window"
            )

    def test_exhaustive_empty(self) -> None:
        """Test that nothing to choose from gives zero."""
        assert exhaustive_nonoverlapped([]) == 0
        assert greedy_nonoverlapped([]) == []

    def test_overlapping_occurrences(self) -> None:
        """Test that occurrences sharing a tick cannot both be chosen."""
        occs = [
            Occurrence((0, 1), (0, 1), 1, 3),
            Occurrence((1, 2), (1, 2), 3, 5),
            Occurrence((2, 3), (2, 3), 4, 6),
        ]

        assert exhaustive_nonoverlapped(occs) == 2
        assert len(greedy_nonoverlapped(occs)) == 2


@pytest.mark.unit
class TestGuards:
    """Tests for the size limits."""

    def test_too_many_nodes(self, sequence_one: EventSequence) -> None:
        """Test the node limit."""
        with pytest.raises(OracleGuardError, match="nodes"):
            enumerate_occurrences(Episode.parallel("ABCDEFG"), sequence_one)

    def test_too_many_events(self) -> None:
        """Test the stream length limit."""
        stream = EventSequence.from_events(("A", t) for t in range(1, 62))
        with pytest.raises(OracleGuardError, match="events"):
            max_nonoverlapped(Episode.serial("AB"), stream)

    def test_exhaustive_limit(self) -> None:
        """Test the subset search limit."""
        occs = [Occurrence((k,), (k,), k, k) for k in range(17)]
        with pytest.raises(OracleGuardError):
            exhaustive_nonoverlapped(occs)

    @pytest.mark.parametrize(("symbols", "k"), [("ABCDEF", 2), ("ABC", 5), ("ABC", 0)])
    def test_enumeration_limits(self, symbols: str, k: int) -> None:
        """Test the episode enumeration limits."""
        with pytest.raises(OracleGuardError):
            enumerate_all_episodes(symbols, k)


@pytest.mark.unit
class TestEnumerateAllEpisodes:
    """Tests for exhaustive episode enumeration."""

    @pytest.mark.parametrize(("symbols", "k", "count"), [("AB", 2, 3), ("ABC", 3, 19), ("ABCD", 4, 219)])
    def test_poset_counts(self, symbols: str, k: int, count: int) -> None:
        """Test the number of labelled partial orders per symbol set."""
        episodes = enumerate_all_episodes(symbols, k)

        assert len(episodes) == count
        assert len(set(episodes)) == count

    def test_single_nodes(self) -> None:
        """Test that one node gives one episode per symbol."""
        assert enumerate_all_episodes("CAB", 1) == [Episode.parallel(s) for s in "ABC"]
