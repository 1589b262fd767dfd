"""Tests for bidirectional evidence."""

import numpy as np
import pytest
from src.episodes.model import Episode, maximal_subepisodes, parse_episode
from src.episodes.stream import EventSequence
from src.mining.counter import CountResult, count_frequencies
from src.mining.evidence import (
    bidirectional_evidence,
    pair_evidence,
    precedence_from_occurrences,
)


@pytest.mark.unit
class TestPairEvidence:
    """Tests for the binary entropy of one pair."""

    def test_skewed_split(self) -> None:
        """Test 110 against 90."""
        assert pair_evidence(110, 90) == pytest.approx(0.992774, abs=1e-6)

    @pytest.mark.parametrize("k", [1, 7, 250])
    def test_balanced_and_one_sided(self, k: int) -> None:
        """Test the maximum and minimum values."""
        assert pair_evidence(k, k) == 1.0
        assert pair_evidence(k, 0) == 0.0
        assert pair_evidence(0, k) == 0.0

    def test_no_observations(self) -> None:
        """Test that an unobserved pair is not penalised."""
        assert pair_evidence(0, 0) == 1.0

    def test_symmetric(self) -> None:
        """Test orientation symmetry."""
        assert pair_evidence(3, 11) == pytest.approx(pair_evidence(11, 3))

    def test_negative_counts(self) -> None:
        """Test that negative counts are rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            pair_evidence(-1, 2)


@pytest.mark.unit
class TestBidirectionalEvidence:
    """Tests for the minimum over unordered pairs."""

    def test_serial_is_one(self) -> None:
        """Test that a fully ordered episode has nothing to penalise."""
        alpha = Episode.serial("ABC")
        report = bidirectional_evidence(alpha, CountResult(alpha, 5, np.zeros((3, 3), dtype=np.int64)))

        assert report.h == 1.0
        assert report.argmin is None
        assert report.pairs == []

    def test_one_sided_pair_dominates(self) -> None:
        """Test a parallel episode whose data always puts A first."""
        alpha = Episode.parallel("ABC")
        fij = np.array([[0, 10, 5], [0, 0, 5], [5, 5, 0]])
        report = bidirectional_evidence(alpha, CountResult(alpha, 10, fij))

        assert report.h == 0.0
        assert report.argmin == (0, 1)
        assert len(report.pairs) == 3

    def test_alternating_extensions(self) -> None:
        """Test (A B) before C on a stream alternating both orders of A and B."""
        alpha = parse_episode("A B C | A<C B<C")
        events = []
        for k in range(10):
            first, second = ("A", "B") if k % 2 == 0 else ("B", "A")
            base = 10 * k + 1
            events += [(first, base), (second, base + 1), ("C", base + 2)]
        (result,) = count_frequencies([alpha], EventSequence.from_events(events))
        report = bidirectional_evidence(alpha, result)

        assert result.freq == 10
        assert report.h == 1.0
        assert report.argmin == (0, 1)

    def test_fork_on_sequence_one(self, sequence_one: EventSequence) -> None:
        """Test B before A and C, where A and C come once in each order."""
        alpha = parse_episode("A B C | B<A B<C")
        (result,) = count_frequencies([alpha], sequence_one)

        assert bidirectional_evidence(alpha, result).h == 1.0

    def test_shape_mismatch(self) -> None:
        """Test that a precedence matrix of the wrong size is rejected."""
        alpha = Episode.parallel("AB")
        with pytest.raises(ValueError, match="does not match"):
            bidirectional_evidence(alpha, CountResult(alpha, 0, np.zeros((3, 3), dtype=np.int64)))


@pytest.mark.unit
class TestRestrictedOccurrences:
    """Tests for precedence counts rebuilt from recorded occurrences."""

    def test_restriction_to_pair(self, sequence_one: EventSequence) -> None:
        """Test restricting the fork's occurrences to A and C."""
        source = parse_episode("A B C | B<A B<C")
        (result,) = count_frequencies([source], sequence_one, record_occurrences=True)
        fij = precedence_from_occurrences(
            parse_episode("A C |"), sequence_one, result.occurrences, source
        )

        assert fij.tolist() == [[0, 1], [1, 0]]

    def test_subepisode_evidence_dominates(self) -> None:
        """Test that maximal subepisodes score at least as high on shared occurrences."""
        rng = np.random.default_rng(7)
        alpha = Episode.parallel("ABCD")
        events = []
        tick = 1
        for _ in range(40):
            order = rng.permutation(4) if rng.random() < 0.3 else np.array([0, 1, 2, 3])
            for k in order:
                events.append(("ABCD"[int(k)], tick))
                tick += 1
            tick += 3
        stream = EventSequence.from_events(events)
        (result,) = count_frequencies([alpha], stream, record_occurrences=True)
        h_alpha = bidirectional_evidence(alpha, result).h

        for beta in maximal_subepisodes(alpha):
            fij = precedence_from_occurrences(beta, stream, result.occurrences, alpha)
            restricted = CountResult(beta, result.freq, fij)
            assert bidirectional_evidence(beta, restricted).h >= h_alpha
