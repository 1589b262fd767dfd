"""
Injective episodes with general partial orders.

An episode is a set of distinct event-types together with a strict partial
order over them. Episodes are kept in canonical form: event-types sorted by
codepoint order (identical to byte-wise UTF-8 order) and the order relation
stored transitively closed as one bitmask per node. Bit ``j`` of
``order[i]`` is set when ``events[i]`` must occur strictly before
``events[j]``.

The text form lists the event-types followed by the edges of the transitive
reduction::

    A B C | B<A B<C
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import networkx as nx
import numpy as np

from src.episodes.errors import (
    EpisodeError,
    EpisodeSyntaxError,
    InjectivityError,
    PartialOrderError,
)

logger = logging.getLogger(__name__)

MAX_NODES = 64
ALPHABET_ORDER = "bytewise"

_FORBIDDEN_SYMBOL_CHARS = frozenset("|<#")


def bit_indices(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _remove_bit(mask: int, i: int) -> int:
    """Delete bit position ``i`` and shift the higher bits down by one."""
    low = mask & ((1 << i) - 1)
    return low | ((mask >> (i + 1)) << i)


def _close(rows: Sequence[int]) -> list[int]:
    """Warshall closure over row bitmasks."""
    closed = list(rows)
    n = len(closed)
    for k in range(n):
        bit = 1 << k
        row_k = closed[k]
        for i in range(n):
            if closed[i] & bit:
                closed[i] |= row_k
    return closed


class ViolationKind(str, Enum):
    """Which strict partial order axiom a relation breaks."""

    IRREFLEXIVITY = "irreflexivity"
    ANTISYMMETRY = "antisymmetry"
    TRANSITIVITY = "transitivity"


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of :func:`validate_partial_order`.

    ``nodes`` names the offending node indices: ``(i,)`` for a reflexive
    pair, ``(i, j)`` for a symmetric pair and ``(i, j, k)`` for a missing
    transitive edge ``i<k`` implied by ``i<j`` and ``j<k``.
    """

    ok: bool
    kind: ViolationKind | None = None
    nodes: tuple[int, ...] = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Relation:
    """A raw binary relation over ``size`` nodes, possibly invalid."""

    size: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.size:
            raise ValueError(f"Relation of size {self.size} needs {self.size} rows, got {len(self.rows)}")
        limit = 1 << self.size
        for row in self.rows:
            if row < 0 or row >= limit:
                raise ValueError(f"Row bitmask {row} out of range for size {self.size}")

    @classmethod
    def empty(cls, size: int) -> Relation:
        return cls(size, (0,) * size)

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[tuple[int, int]]) -> Relation:
        rows = [0] * size
        for i, j in pairs:
            if not (0 <= i < size and 0 <= j < size):
                raise ValueError(f"Pair ({i}, {j}) out of range for size {size}")
            rows[i] |= 1 << j
        return cls(size, tuple(rows))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[bool]] | np.ndarray) -> Relation:
        arr = np.asarray(matrix, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"Relation matrix must be square, got shape {arr.shape}")
        rows = tuple(sum(1 << int(j) for j in np.flatnonzero(arr[i])) for i in range(arr.shape[0]))
        return cls(int(arr.shape[0]), rows)

    def has(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.rows) for j in bit_indices(row)]

    def closure(self) -> Relation:
        return Relation(self.size, tuple(_close(self.rows)))

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=bool)
        for i, j in self.pairs():
            out[i, j] = True
        return out


def validate_partial_order(r: Relation) -> OrderVerdict:
    """Check that ``r`` is irreflexive, antisymmetric and transitively closed.

    The verdict reports the first violation found, scanning nodes in index
    order: reflexive pairs first, then symmetric pairs, then missing
    transitive edges.
    """
    n = r.size
    for i in range(n):
        if r.rows[i] >> i & 1:
            return OrderVerdict(False, ViolationKind.IRREFLEXIVITY, (i,), f"node {i} relates to itself")
    for i in range(n):
        for j in bit_indices(r.rows[i]):
            if j > i and r.rows[j] >> i & 1:
                return OrderVerdict(
                    False, ViolationKind.ANTISYMMETRY, (i, j), f"nodes {i} and {j} precede each other"
                )
    for i in range(n):
        for j in bit_indices(r.rows[i]):
            missing = r.rows[j] & ~r.rows[i]
            if missing:
                k = bit_indices(missing)[0]
                return OrderVerdict(
                    False,
                    ViolationKind.TRANSITIVITY,
                    (i, j, k),
                    f"{i}<{j} and {j}<{k} but {i}<{k} is missing",
                )
    return OrderVerdict(True)


def check_symbol(symbol: str) -> None:
    if not symbol:
        raise EpisodeError("Event-type symbols must be non-empty")
    if any(ch.isspace() for ch in symbol) or _FORBIDDEN_SYMBOL_CHARS.intersection(symbol):
        raise EpisodeError(f"Invalid event-type symbol {symbol!r}")


@dataclass(frozen=True)
class Episode:
    """A canonical injective episode.

    Build episodes through :func:`canonicalize`, :func:`parse_episode` or the
    ``serial``/``parallel``/``from_edges`` constructors; the raw constructor
    trusts its input to already be canonical.
    """

    events: tuple[str, ...]
    order: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.events)

    def precedes(self, i: int, j: int) -> bool:
        return bool(self.order[i] >> j & 1)

    @cached_property
    def parents(self) -> tuple[int, ...]:
        """Per node, the bitmask of nodes that must precede it."""
        cols = [0] * len(self.events)
        for i, row in enumerate(self.order):
            for j in bit_indices(row):
                cols[j] |= 1 << i
        return tuple(cols)

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.events)) - 1

    @cached_property
    def sort_key(self) -> tuple[tuple[str, ...], tuple[int, ...]]:
        """Event-types first, then row-major adjacency bits with 0 before 1."""
        n = len(self.events)
        bits = tuple(row >> j & 1 for row in self.order for j in range(n))
        return self.events, bits

    @cached_property
    def index(self) -> dict[str, int]:
        return {symbol: i for i, symbol in enumerate(self.events)}

    def index_of(self, symbol: str) -> int:
        try:
            return self.index[symbol]
        except KeyError as e:
            raise EpisodeError(f"Event-type {symbol!r} not in episode {self}") from e

    def relation(self) -> Relation:
        return Relation(self.size, self.order)

    def edges(self) -> list[tuple[int, int]]:
        return self.relation().pairs()

    def is_serial(self) -> bool:
        n = self.size
        return sum(row.bit_count() for row in self.order) == n * (n - 1) // 2

    def is_parallel(self) -> bool:
        return not any(self.order)

    def drop(self, i: int) -> Episode:
        """The maximal subepisode obtained by removing node ``i``."""
        if not 0 <= i < self.size:
            raise IndexError(f"Node {i} out of range for a {self.size}-node episode")
        events = self.events[:i] + self.events[i + 1 :]
        order = tuple(_remove_bit(row, i) for k, row in enumerate(self.order) if k != i)
        return Episode(events, order)

    @cached_property
    def prefix(self) -> Episode:
        """The episode left after dropping the last node."""
        return self.drop(self.size - 1)

    def to_graph(self, *, reduced: bool = False) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from(self.edges())
        if reduced:
            return nx.transitive_reduction(graph)
        return graph

    @classmethod
    def serial(cls, symbols: Sequence[str]) -> Episode:
        """Total order following ``symbols`` as written."""
        edges = [(symbols[i], symbols[j]) for i in range(len(symbols)) for j in range(i + 1, len(symbols))]
        return cls.from_edges(symbols, edges)

    @classmethod
    def parallel(cls, symbols: Sequence[str]) -> Episode:
        return cls.from_edges(symbols, [])

    @classmethod
    def from_edges(cls, symbols: Sequence[str], edges: Iterable[tuple[str, str]]) -> Episode:
        """Close the given symbol edges transitively and canonicalize."""
        position = {s: i for i, s in enumerate(symbols)}
        if len(position) != len(symbols):
            raise InjectivityError(f"Duplicate event-type in {list(symbols)}")
        pairs = []
        for a, b in edges:
            if a not in position or b not in position:
                raise EpisodeError(f"Edge {a}<{b} names an event-type outside {list(symbols)}")
            pairs.append((position[a], position[b]))
        raw = Relation.from_pairs(len(symbols), pairs)
        closed = raw.closure()
        for i in range(closed.size):
            if closed.has(i, i):
                raise PartialOrderError(
                    f"Edges form a cycle through {symbols[i]}; closure violates antisymmetry",
                    validate_partial_order(closed),
                )
        return canonicalize(symbols, closed)

    def __str__(self) -> str:
        return format_episode(self)


def canonicalize(events: Sequence[str], r: Relation) -> Episode:
    """Sort event-types by alphabet order and permute ``r`` to match.

    :param events: Distinct event-type symbols, node ``i`` labelled ``events[i]``.
    :param r: A strict partial order over the nodes.
    :return: The canonical episode.
    :raises InjectivityError: If an event-type repeats.
    :raises PartialOrderError: If ``r`` is not a strict partial order.
    """
    n = len(events)
    if n == 0:
        raise EpisodeError("An episode needs at least one node")
    if n > MAX_NODES:
        raise EpisodeError(f"Episodes are limited to {MAX_NODES} nodes, got {n}")
    if r.size != n:
        raise EpisodeError(f"Relation has {r.size} nodes but {n} event-types were given")
    for symbol in events:
        check_symbol(symbol)
    if len(set(events)) != n:
        dupes = sorted({s for s in events if list(events).count(s) > 1})
        raise InjectivityError(f"Duplicate event-types {dupes}")

    verdict = validate_partial_order(r)
    if not verdict:
        raise PartialOrderError(f"Not a strict partial order: {verdict.message}", verdict)

    perm = sorted(range(n), key=lambda i: events[i])
    new_pos = [0] * n
    for new, old in enumerate(perm):
        new_pos[old] = new
    order = []
    for old in perm:
        row = 0
        for j in bit_indices(r.rows[old]):
            row |= 1 << new_pos[j]
        order.append(row)
    return Episode(tuple(events[i] for i in perm), tuple(order))


def parse_episode(text: str) -> Episode:
    """Parse ``"A B C | B<A B<C"`` into a canonical episode.

    :raises EpisodeSyntaxError: If the text does not follow the grammar.
    :raises InjectivityError: If an event-type is listed twice.
    :raises PartialOrderError: If the closed edge set contains a cycle.
    """
    if text.count("|") != 1:
        raise EpisodeSyntaxError(f"Expected exactly one '|' in {text!r}")
    head, tail = text.split("|")
    symbols = head.split()
    if not symbols:
        raise EpisodeSyntaxError(f"No event-types before '|' in {text!r}")
    for symbol in symbols:
        if "<" in symbol:
            raise EpisodeSyntaxError(f"Unexpected '<' in event-type list of {text!r}")
    edges = []
    for token in tail.split():
        parts = token.split("<")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise EpisodeSyntaxError(f"Malformed edge {token!r} in {text!r}")
        edges.append((parts[0], parts[1]))
    known = set(symbols)
    for a, b in edges:
        if a not in known or b not in known:
            raise EpisodeSyntaxError(f"Edge {a}<{b} uses an undeclared event-type in {text!r}")
        if a == b:
            raise PartialOrderError(f"Edge {a}<{b} relates an event-type to itself")
    return Episode.from_edges(symbols, edges)


def transitive_reduction(alpha: Episode) -> Relation:
    """The unique minimal relation whose closure is the episode's order."""
    reduced = alpha.to_graph(reduced=True)
    return Relation.from_pairs(alpha.size, reduced.edges())


def format_episode(alpha: Episode) -> str:
    reduced = sorted(transitive_reduction(alpha).pairs())
    edges = "".join(f" {alpha.events[i]}<{alpha.events[j]}" for i, j in reduced)
    return f"{' '.join(alpha.events)} |{edges}"


def is_subepisode(beta: Episode, alpha: Episode) -> bool:
    """True when beta's event-types and order are both contained in alpha's."""
    index = alpha.index
    if any(symbol not in index for symbol in beta.events):
        return False
    mapping = [index[symbol] for symbol in beta.events]
    for i, row in enumerate(beta.order):
        for j in bit_indices(row):
            if not alpha.precedes(mapping[i], mapping[j]):
                return False
    return True


def maximal_subepisodes(alpha: Episode) -> list[Episode]:
    """One subepisode per dropped node, in dropped-index order."""
    if alpha.size < 2:
        raise EpisodeError("Maximal subepisodes need an episode with at least two nodes")
    return [alpha.drop(i) for i in range(alpha.size)]


class StructuralMetrics(NamedTuple):
    lmax: int
    nmax: int


def structural_metrics(alpha: Episode) -> StructuralMetrics:
    """Longest maximal path (in edges) and number of maximal paths.

    Both are measured on the transitive reduction. An isolated node is a
    maximal path of length zero.
    """
    graph = alpha.to_graph(reduced=True)
    lmax = int(nx.dag_longest_path_length(graph)) if graph.number_of_edges() else 0
    paths_to_sink: dict[int, int] = {}
    for v in reversed(list(nx.topological_sort(graph))):
        succ = list(graph.successors(v))
        paths_to_sink[v] = sum(paths_to_sink[c] for c in succ) if succ else 1
    nmax = sum(paths_to_sink[v] for v in graph.nodes if graph.in_degree(v) == 0)
    return StructuralMetrics(lmax, nmax)


def is_less_specific(a: Episode, b: Episode) -> bool:
    """True when ``a`` has b's event-types and a strictly smaller order."""
    if a.events != b.events or a.order == b.order:
        return False
    return all(ra & ~rb == 0 for ra, rb in zip(a.order, b.order, strict=True))


def most_specific(episodes: Iterable[Episode]) -> list[Episode]:
    """Drop every episode that is less specific than another in the input."""
    items = list(episodes)
    groups: dict[tuple[str, ...], list[Episode]] = {}
    for alpha in items:
        groups.setdefault(alpha.events, []).append(alpha)
    return [
        alpha
        for alpha in items
        if not any(is_less_specific(alpha, other) for other in groups[alpha.events])
    ]


def read_episodes(path: str | Path) -> list[Episode]:
    """Read one episode per line, ignoring blank and ``#`` lines."""
    episodes = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        logger.error(f"Failed to read episodes from {path}: {str(e)}")
        raise
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            episodes.append(parse_episode(stripped))
        except EpisodeSyntaxError as e:
            raise EpisodeSyntaxError(f"{path}:{lineno}: {str(e)}") from e
    logger.info(f"Read {len(episodes)} episodes from {path}")
    return episodes


def write_episodes(path: str | Path, episodes: Iterable[Episode]) -> None:
    text = "".join(f"{format_episode(alpha)}\n" for alpha in episodes)
    Path(path).write_text(text, encoding="utf-8")


__all__ = [
    "ALPHABET_ORDER",
    "bit_indices",
    "check_symbol",
    "MAX_NODES",
    "Episode",
    "OrderVerdict",
    "Relation",
    "StructuralMetrics",
    "ViolationKind",
    "canonicalize",
    "format_episode",
    "is_less_specific",
    "is_subepisode",
    "maximal_subepisodes",
    "most_specific",
    "parse_episode",
    "read_episodes",
    "structural_metrics",
    "transitive_reduction",
    "validate_partial_order",
    "write_episodes",
]
