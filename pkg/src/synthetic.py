"""
Synthetic event streams with embedded episodes.

Each embedded episode gets its own stream of occurrences. Every occurrence
is a random serial extension of the episode with geometric(eta) gaps between
its events, and a geometric(p) gap separates the end of one occurrence from
the start of the next. Every alphabet symbol additionally gets a noise
stream with geometric(rho) inter-arrival times, or geometric(rho/5) for
symbols used by the embedded episodes. All streams are truncated at the
horizon and merged by tick.

Example:
    >>> from src.episodes.model import Episode
    >>> cfg = GenConfig(patterns=[Episode.serial("AB")], eta=1, p=1, rho=0,
    ...                 alphabet_size=2, ticks=6, seed=0)
    >>> generate_stream(cfg).events()
    [('A', 1), ('B', 2), ('A', 3), ('B', 4), ('A', 5), ('B', 6)]
"""

from __future__ import annotations

import logging
from enum import Enum
from functools import lru_cache
from pathlib import Path

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.episodes.model import Episode, bit_indices, format_episode
from src.episodes.stream import Alphabet, EventSequence
from src.tracing import MiningAttributes, add_span_attribute, traced

logger = logging.getLogger(__name__)

NOISE_PREFIX = "N"


class Sampler(str, Enum):
    """How serial extensions are drawn."""

    MINIMAL = "minimal"
    UNIFORM = "uniform"


class GenConfig(BaseModel):
    """Parameters of the synthetic generator.

    Attributes:
        patterns: Episodes to embed.
        eta: Geometric parameter of gaps inside an occurrence.
        p: Geometric parameter of gaps between occurrences.
        rho: Geometric parameter of noise inter-arrival times; 0 disables noise.
        alphabet_size: Total number of event-types, embedded ones included.
        ticks: Horizon; no event is placed after this tick.
        seed: Seed of the random generator.
        sampler: Serial extension sampler.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    patterns: list[Episode] = Field(default_factory=list, description="Embedded episodes")
    eta: float = Field(..., gt=0.0, le=1.0, description="Intra-occurrence gap parameter")
    p: float = Field(..., gt=0.0, le=1.0, description="Inter-occurrence gap parameter")
    rho: float = Field(..., ge=0.0, le=1.0, description="Noise parameter")
    alphabet_size: int = Field(..., ge=1, description="Number of event-types")
    ticks: int = Field(..., ge=1, description="Horizon in ticks")
    seed: int = Field(0, ge=0, description="Random seed")
    sampler: Sampler = Field(Sampler.MINIMAL, description="Serial extension sampler")

    @model_validator(mode="after")
    def check_alphabet(self) -> GenConfig:
        """The alphabet has to hold every embedded event-type."""
        embedded = self.embedded_symbols()
        if len(embedded) > self.alphabet_size:
            raise ValueError(
                f"Patterns use {len(embedded)} event-types but alphabet_size is {self.alphabet_size}"
            )
        return self

    def embedded_symbols(self) -> list[str]:
        return sorted({s for alpha in self.patterns for s in alpha.events})

    def alphabet(self) -> list[str]:
        """Embedded symbols plus ``N000``-style filler symbols up to ``alphabet_size``."""
        embedded = self.embedded_symbols()
        taken = set(embedded)
        fillers: list[str] = []
        k = 0
        while len(embedded) + len(fillers) < self.alphabet_size:
            name = f"{NOISE_PREFIX}{k:03d}"
            if name not in taken:
                fillers.append(name)
            k += 1
        return sorted(embedded + fillers)


@lru_cache(maxsize=128)
def _linear_extensions(alpha: Episode) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(order) for order in nx.all_topological_sorts(alpha.to_graph()))


def random_serial_extension(
    alpha: Episode, rng: np.random.Generator, sampler: Sampler = Sampler.MINIMAL
) -> list[str]:
    """Draw a total order of the episode's event-types that respects its order.

    The minimal sampler repeatedly picks uniformly among the nodes whose
    parents were all placed; the uniform sampler picks uniformly among all
    linear extensions and is meant for small episodes.
    """
    if sampler is Sampler.UNIFORM:
        extensions = _linear_extensions(alpha)
        order = extensions[int(rng.integers(len(extensions)))]
        return [alpha.events[i] for i in order]

    placed = 0
    out = []
    parents = alpha.parents
    for _ in range(alpha.size):
        ready = [j for j in bit_indices(alpha.full_mask & ~placed) if parents[j] & ~placed == 0]
        j = ready[int(rng.integers(len(ready)))]
        placed |= 1 << j
        out.append(alpha.events[j])
    return out


def _pattern_stream(
    alpha: Episode, config: GenConfig, rng: np.random.Generator
) -> tuple[list[int], list[str]]:
    ticks: list[int] = []
    symbols: list[str] = []
    t = int(rng.geometric(config.p))
    while t <= config.ticks:
        for k, symbol in enumerate(random_serial_extension(alpha, rng, config.sampler)):
            if k:
                t += int(rng.geometric(config.eta))
            if t > config.ticks:
                break
            ticks.append(t)
            symbols.append(symbol)
        t += int(rng.geometric(config.p))
    return ticks, symbols


def _noise_ticks(q: float, horizon: int, rng: np.random.Generator) -> np.ndarray:
    if q <= 0.0:
        return np.zeros(0, dtype=np.int64)
    batch = int(horizon * q * 1.2) + 16
    arrivals = np.cumsum(rng.geometric(q, size=batch))
    while arrivals[-1] <= horizon:
        more = arrivals[-1] + np.cumsum(rng.geometric(q, size=batch))
        arrivals = np.concatenate((arrivals, more))
    return arrivals[arrivals <= horizon].astype(np.int64)


@traced("generate_stream")
def generate_stream(config: GenConfig) -> EventSequence:
    """Generate a merged stream; deterministic for a given config and seed."""
    rng = np.random.default_rng(config.seed)
    parts_ticks: list[np.ndarray] = []
    parts_symbols: list[list[str]] = []
    parts_ids: list[np.ndarray] = []

    for stream_id, alpha in enumerate(config.patterns):
        ticks, symbols = _pattern_stream(alpha, config, rng)
        parts_ticks.append(np.asarray(ticks, dtype=np.int64))
        parts_symbols.append(symbols)
        parts_ids.append(np.full(len(ticks), stream_id, dtype=np.int64))

    embedded = set(config.embedded_symbols())
    offset = len(config.patterns)
    for k, symbol in enumerate(config.alphabet()):
        q = config.rho / 5.0 if symbol in embedded else config.rho
        ticks_arr = _noise_ticks(q, config.ticks, rng)
        parts_ticks.append(ticks_arr)
        parts_symbols.append([symbol] * len(ticks_arr))
        parts_ids.append(np.full(len(ticks_arr), offset + k, dtype=np.int64))

    if not parts_ticks:
        return EventSequence.empty()
    ticks_all = np.concatenate(parts_ticks)
    ids_all = np.concatenate(parts_ids)
    intra = np.concatenate([np.arange(len(t), dtype=np.int64) for t in parts_ticks])
    symbols_all = [s for part in parts_symbols for s in part]

    order = np.lexsort((intra, ids_all, ticks_all))
    alphabet = Alphabet.from_symbols(symbols_all)
    types = np.fromiter((alphabet.ids[symbols_all[k]] for k in order), dtype=np.int64, count=len(order))
    seq = EventSequence(alphabet, types, ticks_all[order])

    add_span_attribute(MiningAttributes.STREAM_EVENTS, len(seq))
    logger.info(
        f"Generated {len(seq)} events ({len(config.patterns)} embedded patterns, "
        f"{config.alphabet_size} event-types, {config.ticks} ticks, seed {config.seed})"
    )
    return seq


def expected_event_count(config: GenConfig, size: int, n_emb: int) -> tuple[float, float]:
    """Expected ``(noise, signal)`` event counts for patterns of a common size."""
    n_embedded = len(config.embedded_symbols())
    n_noise = ((config.alphabet_size - n_embedded) * config.rho + n_embedded * config.rho / 5.0) * config.ticks
    n_signal = config.ticks * size * n_emb / ((size - 1) / config.eta + 1.0 / config.p)
    return n_noise, n_signal


def noise_level(config: GenConfig, size: int, n_emb: int) -> float:
    """Expected fraction of noise events in a generated stream."""
    n_noise, n_signal = expected_event_count(config, size, n_emb)
    if n_noise == 0.0:
        return 0.0
    return n_noise / (n_noise + n_signal)


def write_manifest(path: str | Path, config: GenConfig, events: int | None = None) -> None:
    """Write the generator parameters as ``key=value`` lines."""
    lines = [
        f"eta={config.eta}",
        f"p={config.p}",
        f"rho={config.rho}",
        f"alphabet={config.alphabet_size}",
        f"ticks={config.ticks}",
        f"seed={config.seed}",
        f"sampler={config.sampler.value}",
        f"patterns={len(config.patterns)}",
    ]
    lines += [f"pattern.{k}={format_episode(alpha)}" for k, alpha in enumerate(config.patterns, start=1)]
    if events is not None:
        lines.append(f"events={events}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote manifest {path}")


__all__ = [
    "GenConfig",
    "Sampler",
    "expected_event_count",
    "generate_stream",
    "noise_level",
    "random_serial_extension",
    "write_manifest",
]
