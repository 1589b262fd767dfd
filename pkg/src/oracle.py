"""
Brute-force ground truth for small instances.

Occurrences are enumerated directly from the definition: every node is
mapped to a stream event of its event-type, each ordered pair of nodes maps
to strictly increasing ticks, and the span (last tick minus first tick)
stays within the expiry time. The maximum number of non-overlapped
occurrences then follows from the interval scheduling greedy: repeatedly
take the occurrence that ends first among those starting strictly after the
previously taken one ends. Exchanging the first occurrence of any optimal
set for the earliest-ending one never creates an overlap, so the greedy is
optimal.
"""

import logging
from bisect import bisect_left, bisect_right
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Literal

import networkx as nx
import numpy as np

from src.episodes.errors import OracleGuardError
from src.episodes.model import Episode, Relation, validate_partial_order
from src.episodes.stream import EventSequence

logger = logging.getLogger(__name__)

MAX_ORACLE_NODES = 6
MAX_ORACLE_EVENTS = 60
MAX_ORACLE_OCCURRENCES = 500_000
MAX_EXHAUSTIVE_OCCURRENCES = 16
MAX_ENUM_SIZE = 4
MAX_ENUM_SYMBOLS = 5


@dataclass(frozen=True, order=True)
class Occurrence:
    """Stream indices of an occurrence.

    Ordering compares the indices sorted increasingly, which is the
    lexicographic order on occurrences.
    """

    sorted_indices: tuple[int, ...]
    indices: tuple[int, ...]
    start: int
    end: int


def _guard(alpha: Episode, stream: EventSequence) -> None:
    if alpha.size > MAX_ORACLE_NODES:
        raise OracleGuardError(f"Oracle handles at most {MAX_ORACLE_NODES} nodes, got {alpha.size}")
    if len(stream) > MAX_ORACLE_EVENTS:
        raise OracleGuardError(f"Oracle handles at most {MAX_ORACLE_EVENTS} events, got {len(stream)}")


def _positions(alpha: Episode, stream: EventSequence) -> list[np.ndarray] | None:
    positions = []
    for symbol in alpha.events:
        type_id = stream.alphabet.id_of(symbol)
        if type_id is None:
            return None
        positions.append(np.flatnonzero(stream.types == type_id))
    return positions


def enumerate_occurrences(
    alpha: Episode, stream: EventSequence, expiry: int | None = None
) -> list[Occurrence]:
    """All occurrences with span at most ``expiry``, in lexicographic order.

    :raises OracleGuardError: If the instance is too large to enumerate.
    """
    _guard(alpha, stream)
    positions = _positions(alpha, stream)
    if positions is None:
        return []
    order = list(nx.topological_sort(alpha.to_graph()))
    parents = [[i for i in range(alpha.size) if alpha.precedes(i, j)] for j in range(alpha.size)]
    ticks = stream.ticks
    limit = np.inf if expiry is None else expiry
    assigned = [-1] * alpha.size
    found: list[Occurrence] = []

    def place(depth: int, lo: int, hi: int) -> None:
        if depth == alpha.size:
            idx = tuple(assigned)
            found.append(Occurrence(tuple(sorted(idx)), idx, lo, hi))
            if len(found) > MAX_ORACLE_OCCURRENCES:
                raise OracleGuardError(f"More than {MAX_ORACLE_OCCURRENCES} occurrences of {alpha}")
            return
        node = order[depth]
        bound = max((int(ticks[assigned[u]]) for u in parents[node]), default=-1)
        for k in positions[node]:
            t = int(ticks[k])
            if t <= bound:
                continue
            new_lo, new_hi = min(lo, t), max(hi, t)
            if new_hi - new_lo > limit:
                continue
            assigned[node] = int(k)
            place(depth + 1, new_lo, new_hi)
        assigned[node] = -1

    place(0, np.iinfo(np.int64).max, -1)
    found.sort()
    return found


def greedy_nonoverlapped(occurrences: Sequence[Occurrence]) -> list[Occurrence]:
    """Earliest-ending-first selection of pairwise non-overlapped occurrences."""
    chosen = []
    last_end = -1
    for occ in sorted(occurrences, key=lambda o: (o.end, o.start)):
        if occ.start > last_end:
            chosen.append(occ)
            last_end = occ.end
    return chosen


def exhaustive_nonoverlapped(occurrences: Sequence[Occurrence]) -> int:
    """Largest non-overlapped subset by trying every subset."""
    if len(occurrences) > MAX_EXHAUSTIVE_OCCURRENCES:
        raise OracleGuardError(
            f"Exhaustive search handles at most {MAX_EXHAUSTIVE_OCCURRENCES} occurrences"
        )
    items = sorted(occurrences, key=lambda o: o.start)
    for r in range(len(items), 0, -1):
        for subset in combinations(items, r):
            if all(a.end < b.start for a, b in zip(subset, subset[1:], strict=False)):
                return r
    return 0


def _earliest_completion(
    alpha: Episode,
    order: list[int],
    parents: list[list[int]],
    tick_lists: list[list[int]],
    start: int,
) -> tuple[int, int] | None:
    """Pointwise-earliest occurrence with every event at or after ``start``."""
    when = [0] * alpha.size
    for node in order:
        bound = max((when[u] for u in parents[node]), default=None)
        ticks = tick_lists[node]
        k = bisect_left(ticks, start) if bound is None else bisect_right(ticks, max(bound, start - 1))
        if k == len(ticks):
            return None
        when[node] = ticks[k]
    return min(when), max(when)


def _window_count(alpha: Episode, stream: EventSequence, expiry: int | None) -> int:
    positions = _positions(alpha, stream)
    if positions is None or not len(stream):
        return 0
    tick_lists = [sorted(int(t) for t in stream.ticks[p]) for p in positions]
    order = list(nx.topological_sort(alpha.to_graph()))
    parents = [[i for i in range(alpha.size) if alpha.precedes(i, j)] for j in range(alpha.size)]
    starts = sorted({t for ticks in tick_lists for t in ticks})
    limit = np.inf if expiry is None else expiry

    count = 0
    last_end = -1
    while True:
        best_end = None
        for a in starts[bisect_right(starts, last_end) :]:
            if best_end is not None and a > best_end:
                break
            found = _earliest_completion(alpha, order, parents, tick_lists, a)
            if found is None:
                break
            lo, hi = found
            if hi - lo <= limit and (best_end is None or hi < best_end):
                best_end = hi
        if best_end is None:
            return count
        count += 1
        last_end = best_end


def max_nonoverlapped(
    alpha: Episode,
    stream: EventSequence,
    expiry: int | None = None,
    *,
    method: Literal["enumerate", "window"] = "enumerate",
) -> int:
    """Size of a largest set of non-overlapped occurrences.

    ``enumerate`` runs the greedy over all enumerated occurrences.
    ``window`` finds each next earliest-ending occurrence directly: for every
    candidate start tick, the occurrence that places each node as early as
    its parents allow ends no later than any other occurrence starting there.
    """
    if method == "window":
        return _window_count(alpha, stream, expiry)
    return len(greedy_nonoverlapped(enumerate_occurrences(alpha, stream, expiry)))


def enumerate_all_episodes(symbols: Sequence[str], k: int) -> list[Episode]:
    """Every canonical injective episode of ``k`` nodes over ``symbols``.

    :raises OracleGuardError: Beyond 4 nodes or 5 symbols.
    """
    alphabet = sorted(set(symbols))
    if k < 1 or k > MAX_ENUM_SIZE:
        raise OracleGuardError(f"Episode enumeration needs 1 <= k <= {MAX_ENUM_SIZE}, got {k}")
    if len(alphabet) > MAX_ENUM_SYMBOLS:
        raise OracleGuardError(f"Episode enumeration handles at most {MAX_ENUM_SYMBOLS} symbols")
    slots = [(i, j) for i in range(k) for j in range(k) if i != j]
    relations = []
    for bits in range(1 << len(slots)):
        r = Relation.from_pairs(k, [slots[s] for s in range(len(slots)) if bits >> s & 1])
        if validate_partial_order(r):
            relations.append(r)
    episodes = [
        Episode(events, r.rows) for events in combinations(alphabet, k) for r in relations
    ]
    logger.debug(f"Enumerated {len(episodes)} episodes of size {k} over {len(alphabet)} symbols")
    return episodes


__all__ = [
    "Occurrence",
    "enumerate_all_episodes",
    "enumerate_occurrences",
    "exhaustive_nonoverlapped",
    "greedy_nonoverlapped",
    "max_nonoverlapped",
]
