"""
Levelwise candidate generation for injective episodes.

Frequent ``l``-node episodes are grouped into blocks of episodes sharing the
same ``(l-1)``-node prefix (the episode left after dropping the last node).
Two episodes of a block with different last event-types combine into up to
three ``(l+1)``-node candidates:

- ``Y0``: the union of both orders, last nodes left unordered;
- ``Y1``: the union plus ``last(a1) < last(a2)``;
- ``Y2``: the union plus ``last(a2) < last(a1)``.

Which of these are valid partial orders follows from how each shared prefix
node relates to the two last nodes (:class:`NodeType`). A candidate is kept
only when every ``l``-node maximal subepisode is frequent.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from collections.abc import Iterable, Iterator, Sequence
from enum import Enum

from pydantic import BaseModel, Field

from src.episodes.errors import BlockStructureError, CombineError
from src.episodes.model import Episode, Relation, structural_metrics, validate_partial_order
from src.tracing import MiningAttributes, add_span_attribute, traced

logger = logging.getLogger(__name__)


class JoinKind(str, Enum):
    """The three ways of joining a combinable pair."""

    Y0 = "Y0"
    Y1 = "Y1"
    Y2 = "Y2"


class NodeType(str, Enum):
    """Relation of a shared prefix node ``z`` to the last nodes ``x1`` and ``x2``."""

    T1 = "1"  # x1 < z < x2
    T1P = "1'"  # x2 < z < x1
    T2 = "2"  # x1 < z, z unrelated to x2
    T2P = "2'"  # z < x1, z unrelated to x2
    T3 = "3"  # x2 < z, z unrelated to x1
    T3P = "3'"  # z < x2, z unrelated to x1
    T4 = "4"  # z < x1 and z < x2
    T4P = "4'"  # x1 < z and x2 < z
    T4PP = "4''"  # unrelated to both


class ModeKind(str, Enum):
    GENERAL = "general"
    SERIAL = "serial"
    PARALLEL = "parallel"


class GenerationMode(BaseModel):
    """Restricts the class of generated episodes.

    Attributes:
        kind: ``serial`` never emits unordered last nodes, ``parallel`` never
            emits ordered ones.
        lmax_bound: Upper bound on the longest maximal path (in edges).
        nmax_bound: Upper bound on the number of maximal paths.
    """

    kind: ModeKind = Field(ModeKind.GENERAL, description="Episode class to generate")
    lmax_bound: int | None = Field(None, ge=0, description="Maximum longest-path length")
    nmax_bound: int | None = Field(None, ge=1, description="Maximum number of maximal paths")

    model_config = {"frozen": True}

    def admits(self, kind: JoinKind) -> bool:
        if self.kind is ModeKind.SERIAL:
            return kind is not JoinKind.Y0
        if self.kind is ModeKind.PARALLEL:
            return kind is JoinKind.Y0
        return True

    @property
    def bounded(self) -> bool:
        return self.lmax_bound is not None or self.nmax_bound is not None

    def within_bounds(self, alpha: Episode) -> bool:
        if not self.bounded:
            return True
        metrics = structural_metrics(alpha)
        if self.lmax_bound is not None and metrics.lmax > self.lmax_bound:
            return False
        return self.nmax_bound is None or metrics.nmax <= self.nmax_bound


class CandidateBook:
    """Episodes of one level laid out in blocks.

    ``blockstart[i]`` is the index of the first episode of the block holding
    episode ``i``. ``freq`` and ``h`` are filled in after counting.
    """

    def __init__(self, episodes: Sequence[Episode], blockstart: Sequence[int]) -> None:
        self.episodes = list(episodes)
        self.blockstart = list(blockstart)
        self.freq: list[int] = [0] * len(self.episodes)
        self.h: list[float] = [1.0] * len(self.episodes)
        self._keys = [alpha.sort_key for alpha in self.episodes]
        self._blocks: dict[Episode, tuple[int, int]] = {}
        self.validate()

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[Episode]]) -> CandidateBook:
        """Lay out pre-grouped blocks, sorting each one internally."""
        episodes: list[Episode] = []
        blockstart: list[int] = []
        for block in blocks:
            members = sorted(block, key=lambda alpha: alpha.sort_key)
            start = len(episodes)
            episodes.extend(members)
            blockstart.extend([start] * len(members))
        return cls(episodes, blockstart)

    @classmethod
    def from_episodes(cls, episodes: Iterable[Episode]) -> CandidateBook:
        """Group episodes of one size by prefix into blocks."""
        groups: dict[Episode, list[Episode]] = {}
        for alpha in episodes:
            groups.setdefault(alpha.prefix, []).append(alpha)
        ordered = sorted(groups.items(), key=lambda item: item[0].sort_key)
        return cls.from_blocks(block for _, block in ordered)

    @property
    def level(self) -> int:
        return self.episodes[0].size if self.episodes else 0

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self) -> Iterator[Episode]:
        return iter(self.episodes)

    def __contains__(self, alpha: object) -> bool:
        return isinstance(alpha, Episode) and self.find(alpha) is not None

    def validate(self) -> None:
        """Check block boundaries, shared prefixes and intra-block order.

        :raises BlockStructureError: On any inconsistency.
        """
        if len(self.blockstart) != len(self.episodes):
            raise BlockStructureError("blockstart must have one entry per episode")
        sizes = {alpha.size for alpha in self.episodes}
        if len(sizes) > 1:
            raise BlockStructureError(f"Book mixes episode sizes {sorted(sizes)}")
        self._blocks = {}
        for start, stop in self.blocks():
            prefix = self.episodes[start].prefix
            if prefix in self._blocks:
                raise BlockStructureError(f"Prefix {prefix.events} spans two blocks")
            for k in range(start, stop):
                if self.blockstart[k] != start:
                    raise BlockStructureError(f"Episode {k} has blockstart {self.blockstart[k]}, expected {start}")
                if self.episodes[k].prefix != prefix:
                    raise BlockStructureError(f"Episode {k} does not share its block's prefix")
                if k > start and not self._keys[k - 1] < self._keys[k]:
                    raise BlockStructureError(f"Block starting at {start} is not strictly sorted at {k}")
            self._blocks[prefix] = (start, stop)

    def blocks(self) -> Iterator[tuple[int, int]]:
        """Yield ``(start, stop)`` index ranges of the blocks."""
        n = len(self.episodes)
        start = 0
        while start < n:
            if self.blockstart[start] != start:
                raise BlockStructureError(f"Block boundary expected at {start}")
            stop = start + 1
            while stop < n and self.blockstart[stop] == start:
                stop += 1
            yield start, stop
            start = stop

    def find(self, alpha: Episode) -> int | None:
        """Index of ``alpha`` by prefix lookup and binary search within its block."""
        span = self._blocks.get(alpha.prefix)
        if span is None:
            return None
        start, stop = span
        k = bisect_left(self._keys, alpha.sort_key, start, stop)
        if k < stop and self.episodes[k] == alpha:
            return k
        return None

    def select(self, keep: Sequence[bool]) -> CandidateBook:
        """Sub-book of the flagged episodes, carrying their freq and h along."""
        blocks = []
        for start, stop in self.blocks():
            members = [k for k in range(start, stop) if keep[k]]
            if members:
                blocks.append(members)
        episodes, blockstart, freq, h = [], [], [], []
        for members in blocks:
            first = len(episodes)
            for k in members:
                episodes.append(self.episodes[k])
                blockstart.append(first)
                freq.append(self.freq[k])
                h.append(self.h[k])
        book = CandidateBook(episodes, blockstart)
        book.freq, book.h = freq, h
        return book


def _check_combinable(a1: Episode, a2: Episode) -> None:
    if a1.size != a2.size:
        raise CombineError(f"Cannot join a {a1.size}-node and a {a2.size}-node episode")
    if not a1.events[-1] < a2.events[-1]:
        raise CombineError(
            f"Last event-types must be distinct and ordered, got {a1.events[-1]} and {a2.events[-1]}"
        )
    if a1.prefix != a2.prefix:
        raise CombineError(f"{a1} and {a2} do not share a prefix")


def join_events(a1: Episode, a2: Episode) -> tuple[str, ...]:
    return a1.events + (a2.events[-1],)


def simple_join(a1: Episode, a2: Episode) -> Relation:
    """Union of both orders over the ``l+1`` joined nodes (the Y0 relation).

    :raises CombineError: If the pair is not combinable.
    """
    _check_combinable(a1, a2)
    n = a1.size
    x1, x2 = n - 1, n
    rows = [a1.order[z] | ((a2.order[z] >> x1 & 1) << x2) for z in range(n - 1)]
    rows.append(a1.order[x1])
    rows.append(a2.order[x1])
    return Relation(n + 1, tuple(rows))


def _with_edge(r: Relation, i: int, j: int) -> Relation:
    rows = list(r.rows)
    rows[i] |= 1 << j
    return Relation(r.size, tuple(rows))


def classify_node(a1: Episode, a2: Episode, z: int) -> NodeType:
    """Type of shared prefix node ``z`` relative to the two last nodes."""
    x = a1.size - 1
    before_x1, after_x1 = a1.precedes(z, x), a1.precedes(x, z)
    before_x2, after_x2 = a2.precedes(z, x), a2.precedes(x, z)
    if after_x1:
        if before_x2:
            return NodeType.T1
        return NodeType.T4P if after_x2 else NodeType.T2
    if before_x1:
        if after_x2:
            return NodeType.T1P
        return NodeType.T4 if before_x2 else NodeType.T2P
    if after_x2:
        return NodeType.T3
    return NodeType.T3P if before_x2 else NodeType.T4PP


def _feasible_joins(a1: Episode, a2: Episode) -> list[JoinKind]:
    types = {classify_node(a1, a2, z) for z in range(a1.size - 1)}
    if NodeType.T1 in types:
        return [JoinKind.Y1]
    if NodeType.T1P in types:
        return [JoinKind.Y2]
    kinds = [JoinKind.Y0]
    if not types & {NodeType.T2P, NodeType.T3}:
        kinds.append(JoinKind.Y1)
    if not types & {NodeType.T2, NodeType.T3P}:
        kinds.append(JoinKind.Y2)
    return kinds


def _join_relation(a1: Episode, a2: Episode, kind: JoinKind) -> Relation:
    y0 = simple_join(a1, a2)
    x1, x2 = a1.size - 1, a1.size
    if kind is JoinKind.Y1:
        return _with_edge(y0, x1, x2)
    if kind is JoinKind.Y2:
        return _with_edge(y0, x2, x1)
    return y0


def get_potential_candidates(a1: Episode, a2: Episode) -> dict[JoinKind, Episode]:
    """Joins of a combinable pair that are valid partial orders.

    Decided from the prefix node types alone, without a closure check.
    """
    events = join_events(a1, a2)
    return {
        kind: Episode(events, _join_relation(a1, a2, kind).rows)
        for kind in _feasible_joins(a1, a2)
    }


def naive_potential_candidates(a1: Episode, a2: Episode) -> dict[JoinKind, Episode]:
    """Build all three joins and keep those passing a full partial order check."""
    events = join_events(a1, a2)
    out = {}
    for kind in JoinKind:
        r = _join_relation(a1, a2, kind)
        if validate_partial_order(r):
            out[kind] = Episode(events, r.rows)
    return out


def is_join_transitive(r: Relation) -> bool:
    """Partial order check of a joined relation over triples with both last nodes.

    The prefix-only and single-last-node triples are inherited from the two
    closed parents, so only the last two nodes need checking.
    """
    x1, x2 = r.size - 2, r.size - 1
    x1_x2, x2_x1 = r.has(x1, x2), r.has(x2, x1)
    if x1_x2 and x2_x1:
        return False
    for z in range(r.size - 2):
        if r.has(x1, z) and r.has(z, x2) and not x1_x2:
            return False
        if r.has(x2, z) and r.has(z, x1) and not x2_x1:
            return False
        if x1_x2 and (r.has(z, x1) and not r.has(z, x2) or r.has(x2, z) and not r.has(x1, z)):
            return False
        if x2_x1 and (r.has(z, x2) and not r.has(z, x1) or r.has(x1, z) and not r.has(x2, z)):
            return False
    return True


@traced("generate_candidates")
def generate_candidates(freq: CandidateBook, mode: GenerationMode | None = None) -> CandidateBook:
    """Next-level candidates from a book of frequent episodes.

    Args:
        freq: Frequent episodes of one level, block-structured.
        mode: Episode class and structural bounds; general and unbounded by default.

    Returns:
        A block-structured book of ``(l+1)``-node candidates. Candidates from
        the same first parent form one block.
    """
    mode = mode or GenerationMode()
    eps = freq.episodes
    blocks: list[list[Episode]] = []
    rejected_bounds = 0
    for start, stop in freq.blocks():
        for i in range(start, stop):
            a1 = eps[i]
            n = a1.size
            block: list[Episode] = []
            for j in range(i + 1, stop):
                a2 = eps[j]
                if a1.events[-1] == a2.events[-1]:
                    continue
                for kind, cand in get_potential_candidates(a1, a2).items():
                    if not mode.admits(kind):
                        continue
                    if not mode.within_bounds(cand):
                        rejected_bounds += 1
                        continue
                    # dropping either last node reproduces a parent
                    if all(freq.find(cand.drop(r)) is not None for r in range(n - 1)):
                        block.append(cand)
            if block:
                blocks.append(block)
    book = CandidateBook.from_blocks(blocks)
    add_span_attribute(MiningAttributes.CANDIDATES, len(book))
    logger.debug(
        f"Generated {len(book)} candidates of size {freq.level + 1} from {len(freq)} frequent episodes"
        f" ({rejected_bounds} outside structural bounds)"
    )
    return book


def level_one(symbols: Iterable[str]) -> CandidateBook:
    """One-node candidates, all in a single block."""
    return CandidateBook.from_blocks([[Episode((s,), (0,)) for s in sorted(set(symbols))]])


__all__ = [
    "CandidateBook",
    "GenerationMode",
    "JoinKind",
    "ModeKind",
    "NodeType",
    "classify_node",
    "generate_candidates",
    "get_potential_candidates",
    "is_join_transitive",
    "join_events",
    "level_one",
    "naive_potential_candidates",
    "simple_join",
]
