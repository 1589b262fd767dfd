"""Tests for the synthetic stream generator."""

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError
from src.episodes.model import Episode, parse_episode
from src.synthetic import (
    GenConfig,
    Sampler,
    expected_event_count,
    generate_stream,
    noise_level,
    random_serial_extension,
    write_manifest,
)


@pytest.fixture
def two_serial_patterns() -> list[Episode]:
    """Provide two disjoint eight-node serial patterns.

    Returns:
        List of two episodes over A..H and I..P.
    """
    return [Episode.serial("ABCDEFGH"), Episode.serial("IJKLMNOP")]


@pytest.mark.unit
class TestNoiseLevel:
    """Tests for the expected noise fraction."""

    @pytest.mark.parametrize(
        ("rho", "expected"),
        [(0.045, 0.8736), (0.05, 0.8848), (0.03, 0.8217), (0.02, 0.7544), (0.005, 0.4344)],
    )
    def test_reference_levels(
        self, two_serial_patterns: list[Episode], rho: float, expected: float
    ) -> None:
        """Test the noise fraction for one hundred event-types and two patterns."""
        config = GenConfig(
            patterns=two_serial_patterns, eta=0.7, p=0.055, rho=rho, alphabet_size=100, ticks=10_000
        )

        assert noise_level(config, 8, 2) == pytest.approx(expected, abs=0.01)

    def test_no_noise(self) -> None:
        """Test that rho zero means no noise events at all."""
        config = GenConfig(patterns=[Episode.serial("AB")], eta=1, p=1, rho=0, alphabet_size=2, ticks=10)

        assert noise_level(config, 2, 1) == 0.0

    def test_expected_counts(self) -> None:
        """Test the split into noise and signal."""
        config = GenConfig(
            patterns=[Episode.serial("ABCD")], eta=0.5, p=0.25, rho=0.1, alphabet_size=10, ticks=1000
        )
        n_noise, n_signal = expected_event_count(config, 4, 1)

        assert n_noise == pytest.approx((6 * 0.1 + 4 * 0.02) * 1000)
        assert n_signal == pytest.approx(1000 * 4 / (3 / 0.5 + 4))


@pytest.mark.unit
class TestGenerateStream:
    """Tests for stream generation."""

    def test_deterministic_for_seed(self, embedded_patterns: dict[str, Episode]) -> None:
        """Test that one seed gives one stream and another seed a different one."""
        base = {
            "patterns": list(embedded_patterns.values()),
            "eta": 0.7,
            "p": 0.068,
            "rho": 0.055,
            "alphabet_size": 30,
            "ticks": 2000,
        }
        first = generate_stream(GenConfig(**base, seed=5))
        second = generate_stream(GenConfig(**base, seed=5))
        other = generate_stream(GenConfig(**base, seed=6))

        assert first.events() == second.events()
        assert first.events() != other.events()

    def test_noise_free_serial(self) -> None:
        """Test that certain gaps give a strictly alternating stream."""
        config = GenConfig(patterns=[Episode.serial("AB")], eta=1, p=1, rho=0, alphabet_size=2, ticks=6)

        assert generate_stream(config).events() == [
            ("A", 1),
            ("B", 2),
            ("A", 3),
            ("B", 4),
            ("A", 5),
            ("B", 6),
        ]

    def test_dense_noise(self) -> None:
        """Test that rho one puts every event-type on every tick."""
        config = GenConfig(eta=0.5, p=0.5, rho=1, alphabet_size=4, ticks=50)
        seq = generate_stream(config)

        assert len(seq) == 200
        assert seq.has_ties
        assert set(seq.counts().values()) == {50}
        assert [hi - lo for _, lo, hi in seq.batches()] == [4] * 50

    def test_horizon_and_alphabet(self, embedded_patterns: dict[str, Episode]) -> None:
        """Test that events stay within the horizon and use the configured symbols."""
        config = GenConfig(
            patterns=list(embedded_patterns.values()),
            eta=0.7,
            p=0.068,
            rho=0.055,
            alphabet_size=20,
            ticks=3000,
            seed=3,
        )
        seq = generate_stream(config)

        assert int(seq.ticks.max()) <= 3000
        assert int(seq.ticks.min()) >= 1
        assert set(seq.alphabet.symbols) <= set(config.alphabet())
        assert len(config.alphabet()) == 20
        assert [s for s in config.alphabet() if s.startswith("N")] == [f"N{k:03d}" for k in range(8)]

    def test_event_count_matches_expectation(self) -> None:
        """Test that the generated size is within ten percent of the expected size."""
        config = GenConfig(
            patterns=[parse_episode("A B C D | A<C B<C C<D")],
            eta=0.7,
            p=0.1,
            rho=0.02,
            alphabet_size=20,
            ticks=20_000,
            seed=11,
        )
        n_noise, n_signal = expected_event_count(config, 4, 1)

        assert len(generate_stream(config)) == pytest.approx(n_noise + n_signal, rel=0.1)

    def test_no_patterns_no_noise(self) -> None:
        """Test that nothing to emit gives an empty stream."""
        seq = generate_stream(GenConfig(eta=0.5, p=0.5, rho=0, alphabet_size=3, ticks=100))

        assert len(seq) == 0


@pytest.mark.unit
class TestSerialExtensions:
    """Tests for the serial extension samplers."""

    def test_fork_gives_both_orders(self) -> None:
        """Test that A and B before C are drawn in either order."""
        alpha = parse_episode("A B C | A<C B<C")
        rng = np.random.default_rng(1)
        drawn = {"".join(random_serial_extension(alpha, rng)) for _ in range(200)}

        assert drawn == {"ABC", "BAC"}

    def test_serial_is_fixed(self) -> None:
        """Test that a total order has a single extension."""
        rng = np.random.default_rng(2)
        drawn = {"".join(random_serial_extension(Episode.serial("ABCD"), rng)) for _ in range(50)}

        assert drawn == {"ABCD"}

    def test_uniform_covers_all_permutations(self) -> None:
        """Test the uniform sampler on a parallel episode."""
        rng = np.random.default_rng(3)
        alpha = Episode.parallel("ABC")
        drawn = {
            "".join(random_serial_extension(alpha, rng, Sampler.UNIFORM)) for _ in range(600)
        }

        assert len(drawn) == 6

    @pytest.mark.parametrize("sampler", list(Sampler))
    def test_extensions_respect_order(
        self,
        rng: np.random.Generator,
        make_episode: Callable[..., Episode],
        sampler: Sampler,
    ) -> None:
        """Test that every draw places each node after its predecessors."""
        for _ in range(100):
            alpha = make_episode(rng, list("ABCDEF"), 5, 0.5)
            order = random_serial_extension(alpha, rng, sampler)
            position = {symbol: k for k, symbol in enumerate(order)}

            assert sorted(order) == list(alpha.events)
            for i, j in alpha.edges():
                assert position[alpha.events[i]] < position[alpha.events[j]]


@pytest.mark.unit
class TestGenConfig:
    """Tests for generator configuration."""

    def test_alphabet_too_small(self) -> None:
        """Test that patterns need room in the alphabet."""
        with pytest.raises(ValidationError, match="alphabet_size"):
            GenConfig(patterns=[Episode.serial("ABC")], eta=0.5, p=0.5, rho=0.1, alphabet_size=2, ticks=10)

    @pytest.mark.parametrize(
        "overrides",
        [{"eta": 0.0}, {"p": 1.5}, {"rho": -0.1}, {"ticks": 0}, {"seed": -1}, {"sampler": "exact"}],
    )
    def test_ranges(self, overrides: dict[str, object]) -> None:
        """Test the parameter ranges."""
        base: dict[str, object] = {"eta": 0.5, "p": 0.5, "rho": 0.1, "alphabet_size": 4, "ticks": 10}
        with pytest.raises(ValidationError):
            GenConfig(**{**base, **overrides})

    def test_manifest(self, tmp_path: Path) -> None:
        """Test the manifest lines."""
        config = GenConfig(
            patterns=[parse_episode("A B C | A<B A<C")],
            eta=0.7,
            p=0.068,
            rho=0.055,
            alphabet_size=10,
            ticks=500,
            seed=9,
            sampler=Sampler.UNIFORM,
        )
        path = tmp_path / "stream.txt.manifest"
        write_manifest(path, config, events=123)

        assert path.read_text(encoding="utf-8").splitlines() == [
            "eta=0.7",
            "p=0.068",
            "rho=0.055",
            "alphabet=10",
            "ticks=500",
            "seed=9",
            "sampler=uniform",
            "patterns=1",
            "pattern.1=A B C | A<B A<C",
            "events=123",
        ]
