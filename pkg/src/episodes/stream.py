"""
Event streams and the tab-separated stream file format.

A stream file holds one event per line as ``<tick>\\t<symbol>``, ticks being
non-decreasing base-10 unsigned integers. Lines starting with ``#`` are
comments.
"""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd

from src.episodes.errors import EpisodeError, StreamError, StreamFormatError, UnsortedStreamError
from src.episodes.model import ALPHABET_ORDER, check_symbol

logger = logging.getLogger(__name__)

_MAX_TICK = int(np.iinfo(np.int64).max)


@dataclass(frozen=True)
class Alphabet:
    """Sorted event-type symbols; a symbol's id is its position."""

    symbols: tuple[str, ...]

    @classmethod
    def from_symbols(cls, symbols: Iterable[str]) -> Alphabet:
        return cls(tuple(sorted(set(symbols))))

    @cached_property
    def ids(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def id_of(self, symbol: str) -> int | None:
        return self.ids.get(symbol)

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.ids


@dataclass(frozen=True, eq=False)
class EventSequence:
    """A time-ordered stream of (event-type, tick) pairs; ties allowed."""

    alphabet: Alphabet
    types: np.ndarray
    ticks: np.ndarray

    def __post_init__(self) -> None:
        if self.types.shape != self.ticks.shape:
            raise StreamError("Event types and ticks must have the same length")
        if self.ticks.size and int(self.ticks.min()) < 0:
            raise StreamError("Ticks must be unsigned integers")
        if self.ticks.size > 1:
            drops = np.flatnonzero(np.diff(self.ticks) < 0)
            if drops.size:
                k = int(drops[0])
                raise UnsortedStreamError(
                    f"Tick decreases at event {k + 1}: {int(self.ticks[k])} -> {int(self.ticks[k + 1])}"
                )

    @classmethod
    def from_events(cls, events: Iterable[tuple[str, int]]) -> EventSequence:
        """Build a stream from ``(symbol, tick)`` pairs in stream order."""
        pairs = list(events)
        alphabet = Alphabet.from_symbols(symbol for symbol, _ in pairs)
        types = np.fromiter((alphabet.ids[s] for s, _ in pairs), dtype=np.int64, count=len(pairs))
        ticks = np.fromiter((int(t) for _, t in pairs), dtype=np.int64, count=len(pairs))
        return cls(alphabet, types, ticks)

    @classmethod
    def empty(cls) -> EventSequence:
        return cls(Alphabet(()), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.types.size)

    def symbol_at(self, k: int) -> str:
        return self.alphabet.symbols[int(self.types[k])]

    def events(self) -> list[tuple[str, int]]:
        return [(self.symbol_at(k), int(self.ticks[k])) for k in range(len(self))]

    @property
    def has_ties(self) -> bool:
        return bool(self.ticks.size > 1 and np.any(np.diff(self.ticks) == 0))

    def batches(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(tick, start, stop)`` index ranges of equal-tick runs."""
        n = len(self)
        if n == 0:
            return
        cuts = np.flatnonzero(np.diff(self.ticks)) + 1
        starts = np.concatenate(([0], cuts))
        stops = np.concatenate((cuts, [n]))
        for start, stop in zip(starts.tolist(), stops.tolist(), strict=True):
            yield int(self.ticks[start]), start, stop

    def counts(self) -> dict[str, int]:
        """Number of events per symbol present in the stream."""
        values, freq = np.unique(self.types, return_counts=True)
        return {self.alphabet.symbols[int(v)]: int(c) for v, c in zip(values, freq, strict=True)}


def read_stream(path: str | Path) -> EventSequence:
    """Load a ``<tick>\\t<symbol>`` file.

    Only lines whose first character is ``#`` are comments; a ``#`` later on
    a line is part of the event and rejected by the symbol rules.

    :raises StreamFormatError: If a line has the wrong shape, a bad tick or a bad symbol.
    :raises UnsortedStreamError: If ticks decrease.
    :raises OSError: If the file cannot be read.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise StreamFormatError(f"Stream file {path} is not UTF-8 text: {str(e)}") from e
    line_numbers: list[int] = []
    data: list[str] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#") or not line.strip():
            continue
        line_numbers.append(number)
        data.append(line)
    if not data:
        logger.info(f"Stream file {path} holds no events")
        return EventSequence.empty()

    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(data)),
            sep="\t",
            header=None,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            engine="c",
        )
    except pd.errors.ParserError as e:
        logger.error(f"Failed to parse stream {path}: {str(e)}")
        raise StreamFormatError(f"Malformed stream file {path}: {str(e)}") from e

    if frame.shape[1] != 2:
        raise StreamFormatError(f"Expected <tick><TAB><symbol> lines in {path}, found {frame.shape[1]} fields")
    frame = frame.fillna("")
    frame.columns = ["tick", "symbol"]
    ticks_text = frame["tick"].str.strip()
    symbols = frame["symbol"].str.strip()

    def malformed(row: int, reason: str) -> StreamFormatError:
        return StreamFormatError(
            f"{reason} on line {line_numbers[row]} of {path}: "
            f"{frame['tick'].iloc[row]!r} {frame['symbol'].iloc[row]!r}"
        )

    bad_tick = ~ticks_text.str.fullmatch(r"[0-9]+")
    if bad_tick.any():
        raise malformed(int(np.flatnonzero(bad_tick.to_numpy())[0]), "Malformed tick")
    tick_values = ticks_text.map(int)
    too_large = (tick_values > _MAX_TICK).to_numpy(dtype=bool)
    if too_large.any():
        raise malformed(int(np.flatnonzero(too_large)[0]), f"Tick above {_MAX_TICK}")
    for symbol in symbols.unique():
        try:
            check_symbol(symbol)
        except EpisodeError as e:
            row = int(np.flatnonzero((symbols == symbol).to_numpy())[0])
            raise malformed(row, str(e)) from e

    ticks = tick_values.to_numpy(dtype=np.int64)
    alphabet = Alphabet.from_symbols(symbols.unique())
    types = symbols.map(alphabet.ids).to_numpy(dtype=np.int64)
    seq = EventSequence(alphabet, types, ticks)
    logger.info(f"Read {len(seq)} events over {len(alphabet)} event-types from {path}")
    return seq


def write_stream(path: str | Path, seq: EventSequence) -> None:
    frame = pd.DataFrame(
        {
            "tick": seq.ticks,
            "symbol": [seq.alphabet.symbols[int(t)] for t in seq.types],
        }
    )
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# alphabet-order={ALPHABET_ORDER}\n")
        frame.to_csv(handle, sep="\t", header=False, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(seq)} events to {path}")


__all__ = ["Alphabet", "EventSequence", "read_stream", "write_stream"]
