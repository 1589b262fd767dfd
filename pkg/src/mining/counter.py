"""
Non-overlapped occurrence counting under an expiry-time constraint.

One pass over the stream drives a small population of automata per
candidate episode. A fresh automaton is spawned in the start state whenever
the previous start-state automaton accepts its first event; when two
automata of an episode land in the same state the older one is dropped; and
when an automaton completes an occurrence whose span is within the expiry
time, the frequency is incremented and the episode starts over with a
single start-state automaton.

Events that share a tick are processed as one batch: every automaton
accepts the intersection of the batch with the wait set it had before the
batch, so an event-type enabled during the batch cannot be accepted until
the next tick.

Example:
    >>> from src.episodes.model import parse_episode
    >>> from src.episodes.stream import EventSequence
    >>> stream = EventSequence.from_events([("B", 1), ("A", 2), ("C", 3)])
    >>> [r.freq for r in count_frequencies([parse_episode("A B C | B<A B<C")], stream)]
    [1]
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from src.episodes.automaton import enabled_from, wait_from_accepted
from src.episodes.errors import AutomatonInvariantError, CandidateSizeError
from src.episodes.model import Episode, bit_indices
from src.episodes.stream import EventSequence
from src.tracing import MiningAttributes, add_span_attribute, traced

logger = logging.getLogger(__name__)


@dataclass
class CountResult:
    """Frequency and precedence counts of one episode.

    ``fij[i, j]`` counts the counted occurrences in which node ``i`` was
    seen strictly before node ``j``. ``occurrences`` holds the stream index
    of every node for each counted occurrence when recording was requested.
    """

    episode: Episode
    freq: int = 0
    fij: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    occurrences: list[tuple[int, ...]] = field(default_factory=list)
    peak_live: int = 0


class _Automaton:
    __slots__ = ("q", "w", "t_init", "ticks", "witness")

    def __init__(self, size: int, w: int) -> None:
        self.q = 0
        self.w = w
        self.t_init = -1
        self.ticks = [-1] * size
        self.witness = [-1] * size


class FrequencyCounter:
    """Stateful engine behind :func:`count_frequencies`.

    :param candidates: Canonical episodes, all with the same number of nodes.
    :param stream: Only the stream's alphabet is used at construction; feed
        events through :meth:`process_batch` in stream order.
    :param expiry: Largest allowed span in ticks, or ``None`` for unlimited.
    :param record_occurrences: Keep the stream indices of counted occurrences.
    :param debug: Check nesting of accepted sets after every batch and
        replay every counted occurrence against the stream.
    """

    def __init__(
        self,
        candidates: Sequence[Episode],
        stream: EventSequence,
        expiry: int | None = None,
        *,
        record_occurrences: bool = False,
        debug: bool = False,
    ) -> None:
        sizes = {alpha.size for alpha in candidates}
        if len(sizes) > 1:
            raise CandidateSizeError(f"Candidates must share one size, got sizes {sorted(sizes)}")
        if expiry is not None and expiry < 0:
            raise ValueError(f"Expiry must be non-negative, got {expiry}")

        self.candidates = list(candidates)
        self.stream = stream
        self.expiry = expiry
        self.record_occurrences = record_occurrences
        self.debug = debug
        self.size = sizes.pop() if sizes else 0

        alphabet = stream.alphabet
        self._types: list[list[int]] = [
            [alphabet.ids.get(symbol, -1) for symbol in alpha.events] for alpha in self.candidates
        ]
        self._waits: list[dict[tuple[int, int], int]] = [{} for _ in range(len(alphabet))]
        self._live: list[dict[int, _Automaton]] = [{} for _ in self.candidates]
        self._w_start = [wait_from_accepted(alpha, 0) for alpha in self.candidates]
        self.results = [
            CountResult(alpha, fij=np.zeros((alpha.size, alpha.size), dtype=np.int64))
            for alpha in self.candidates
        ]
        for ep in range(len(self.candidates)):
            self._spawn(ep)

    def _register(self, ep: int, a: _Automaton) -> None:
        types = self._types[ep]
        key = (ep, a.q)
        for j in bit_indices(a.w):
            type_id = types[j]
            if type_id >= 0:
                self._waits[type_id][key] = j

    def _unregister(self, ep: int, a: _Automaton) -> None:
        types = self._types[ep]
        key = (ep, a.q)
        for j in bit_indices(a.w):
            type_id = types[j]
            if type_id >= 0:
                self._waits[type_id].pop(key, None)

    def _spawn(self, ep: int) -> None:
        a = _Automaton(self.size, self._w_start[ep])
        self._live[ep][0] = a
        self._register(ep, a)

    def _reset(self, ep: int) -> None:
        for a in self._live[ep].values():
            self._unregister(ep, a)
        self._live[ep].clear()
        self._spawn(ep)

    def process_event(self, tick: int, type_id: int, index: int) -> None:
        self.process_batch(tick, [(type_id, index)])

    def process_batch(self, tick: int, events: Sequence[tuple[int, int]]) -> None:
        """Apply all events sharing ``tick``.

        :param tick: The common timestamp of the batch.
        :param events: ``(type_id, stream_index)`` pairs at this tick.
        """
        first_index: dict[int, int] = {}
        for type_id, index in events:
            first_index.setdefault(type_id, index)

        # transitions enabled before the batch only
        moves: dict[tuple[int, int], int] = {}
        for type_id in first_index:
            for key, j in self._waits[type_id].items():
                moves[key] = moves.get(key, 0) | (1 << j)
        if not moves:
            return

        by_episode: dict[int, list[tuple[int, int]]] = {}
        for (ep, q), acc in moves.items():
            by_episode.setdefault(ep, []).append((q, acc))

        for ep, moved in by_episode.items():
            self._advance(ep, tick, moved, first_index)

    def _advance(
        self, ep: int, tick: int, moved: list[tuple[int, int]], first_index: dict[int, int]
    ) -> None:
        alpha = self.candidates[ep]
        live = self._live[ep]
        types = self._types[ep]
        full = alpha.full_mask
        respawn = False

        advanced = []
        for q, acc in moved:
            a = live.pop(q)
            self._unregister(ep, a)
            if q == 0:
                a.t_init = tick
                respawn = True
            a.q = q | acc
            children = 0
            for j in bit_indices(acc):
                a.ticks[j] = tick
                a.witness[j] = first_index[types[j]]
                children |= alpha.order[j]
            a.w = (a.w & ~acc) | enabled_from(alpha, children, a.q)
            advanced.append(a)

        finals = []
        for a in advanced:
            if a.q == full:
                finals.append(a)
                continue
            other = live.get(a.q)
            if other is not None:
                if other.t_init >= a.t_init:
                    continue
                self._unregister(ep, other)
            live[a.q] = a
            self._register(ep, a)

        if finals:
            best = max(finals, key=lambda f: f.t_init)
            if self.expiry is None or tick - best.t_init <= self.expiry:
                self._count(ep, best)
                self._reset(ep)
                respawn = False
            else:
                logger.debug(
                    f"Retired {alpha} occurrence spanning {tick - best.t_init} ticks at tick {tick}"
                )

        if respawn and 0 not in live:
            self._spawn(ep)

        self._check(ep)

    def _count(self, ep: int, a: _Automaton) -> None:
        result = self.results[ep]
        result.freq += 1
        ticks = np.asarray(a.ticks, dtype=np.int64)
        result.fij += ticks[:, None] < ticks[None, :]
        if self.debug:
            self._replay(ep, a)
        if self.record_occurrences:
            result.occurrences.append(tuple(a.witness))

    def _check(self, ep: int) -> None:
        live = self._live[ep]
        result = self.results[ep]
        result.peak_live = max(result.peak_live, len(live))
        if len(live) > max(self.size, 1):
            raise AutomatonInvariantError(
                f"{self.candidates[ep]} has {len(live)} live automata, more than its {self.size} nodes"
            )
        if self.debug:
            chain = sorted(live, key=int.bit_count)
            for small, big in zip(chain, chain[1:], strict=False):
                if small & ~big or small == big:
                    raise AutomatonInvariantError(
                        f"Accepted sets {small:#b} and {big:#b} of {self.candidates[ep]} are not nested"
                    )

    def _replay(self, ep: int, a: _Automaton) -> None:
        alpha = self.candidates[ep]
        stream = self.stream
        for j, index in enumerate(a.witness):
            if stream.symbol_at(index) != alpha.events[j]:
                raise AutomatonInvariantError(
                    f"Witness index {index} of {alpha} holds {stream.symbol_at(index)}, not {alpha.events[j]}"
                )
        for i, j in alpha.edges():
            if not stream.ticks[a.witness[i]] < stream.ticks[a.witness[j]]:
                raise AutomatonInvariantError(
                    f"Witness of {alpha} breaks {alpha.events[i]}<{alpha.events[j]}"
                )
        span = int(stream.ticks[max(a.witness)] - stream.ticks[min(a.witness)])
        if self.expiry is not None and span > self.expiry:
            raise AutomatonInvariantError(f"Witness of {alpha} spans {span} > {self.expiry}")

    def run(self) -> list[CountResult]:
        """Scan the whole stream and return one result per candidate."""
        types = self.stream.types
        for tick, start, stop in self.stream.batches():
            if stop - start == 1:
                self.process_event(tick, int(types[start]), start)
            else:
                self.process_batch(tick, [(int(types[k]), k) for k in range(start, stop)])
        return self.results


def _count_chunk(
    candidates: list[Episode],
    stream: EventSequence,
    expiry: int | None,
    record_occurrences: bool,
    debug: bool,
) -> list[CountResult]:
    counter = FrequencyCounter(
        candidates, stream, expiry, record_occurrences=record_occurrences, debug=debug
    )
    return counter.run()


@traced("count_frequencies")
def count_frequencies(
    candidates: Sequence[Episode],
    stream: EventSequence,
    expiry: int | None = None,
    *,
    record_occurrences: bool = False,
    debug: bool = False,
    workers: int = 1,
) -> list[CountResult]:
    """Count non-overlapped occurrences of every candidate in one pass.

    Args:
        candidates: Canonical episodes of one common size.
        stream: The event stream.
        expiry: Largest allowed occurrence span (inclusive), ``None`` for unlimited.
        record_occurrences: Store the stream indices of each counted occurrence.
        debug: Enable nesting and replay checks.
        workers: Partition candidates over this many processes.

    Returns:
        One :class:`CountResult` per candidate, in input order.

    Raises:
        CandidateSizeError: If candidates differ in size.
    """
    candidates = list(candidates)
    add_span_attribute(MiningAttributes.CANDIDATES, len(candidates))
    add_span_attribute(MiningAttributes.STREAM_EVENTS, len(stream))
    if not candidates:
        return []
    sizes = {alpha.size for alpha in candidates}
    if len(sizes) > 1:
        raise CandidateSizeError(f"Candidates must share one size, got sizes {sorted(sizes)}")

    if workers <= 1 or len(candidates) < 2 * workers:
        results = _count_chunk(candidates, stream, expiry, record_occurrences, debug)
    else:
        chunks = [candidates[k::workers] for k in range(workers)]
        logger.info(f"Counting {len(candidates)} candidates over {workers} worker processes")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_count_chunk, chunk, stream, expiry, record_occurrences, debug)
                for chunk in chunks
            ]
            parts = [f.result() for f in futures]
        results = [None] * len(candidates)  # type: ignore[list-item]
        for k, part in enumerate(parts):
            for offset, result in enumerate(part):
                results[k + offset * workers] = result

    peak = max((r.peak_live for r in results), default=0)
    logger.debug(f"Counted {len(candidates)} {sizes.pop()}-node candidates, peak live automata {peak}")
    return results


__all__ = ["CountResult", "FrequencyCounter", "count_frequencies"]
