"""
Bidirectional evidence of an episode.

For every pair of nodes left unordered by the episode, the counted
occurrences say how often each node came first. An episode whose unordered
pairs genuinely appear in both orders scores close to 1; a "parallel"
episode whose data always follows one order scores close to 0.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import entropy

from src.episodes.model import Episode
from src.episodes.stream import EventSequence
from src.mining.counter import CountResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairEvidence:
    i: int
    j: int
    p: float
    h: float


@dataclass(frozen=True)
class EvidenceReport:
    """Minimum pair evidence with the pair that attains it.

    ``argmin`` is ``None`` when the episode has no unordered pairs, in which
    case ``h`` is 1.
    """

    h: float
    argmin: tuple[int, int] | None = None
    pairs: list[PairEvidence] = field(default_factory=list)


def pair_evidence(cnt_ij: int, cnt_ji: int) -> float:
    """Base-2 binary entropy of the observed precedence proportion."""
    if cnt_ij < 0 or cnt_ji < 0:
        raise ValueError(f"Precedence counts must be non-negative, got ({cnt_ij}, {cnt_ji})")
    m = cnt_ij + cnt_ji
    if m == 0:
        return 1.0
    p = cnt_ij / m
    return float(entropy([p, 1.0 - p], base=2))


def bidirectional_evidence(alpha: Episode, result: CountResult) -> EvidenceReport:
    """Minimum of :func:`pair_evidence` over the episode's unordered pairs.

    :raises ValueError: If the precedence matrix does not match the episode size.
    """
    fij = np.asarray(result.fij)
    if fij.shape != (alpha.size, alpha.size):
        raise ValueError(
            f"Precedence matrix of shape {fij.shape} does not match a {alpha.size}-node episode"
        )
    pairs = []
    for i in range(alpha.size):
        for j in range(i + 1, alpha.size):
            if alpha.precedes(i, j) or alpha.precedes(j, i):
                continue
            a, b = int(fij[i, j]), int(fij[j, i])
            p = a / (a + b) if a + b else 0.5
            pairs.append(PairEvidence(i, j, p, pair_evidence(a, b)))
    if not pairs:
        return EvidenceReport(1.0)
    best = min(pairs, key=lambda pe: pe.h)
    return EvidenceReport(best.h, (best.i, best.j), pairs)


def precedence_from_occurrences(
    alpha: Episode, stream: EventSequence, occurrences: Sequence[Sequence[int]], source: Episode
) -> np.ndarray:
    """Rebuild ``fij`` for ``alpha`` from occurrences recorded for ``source``.

    ``alpha`` must use a subset of the source's event-types; each source
    occurrence is restricted to those nodes.
    """
    mapping = [source.index_of(symbol) for symbol in alpha.events]
    fij = np.zeros((alpha.size, alpha.size), dtype=np.int64)
    for occurrence in occurrences:
        ticks = stream.ticks[[occurrence[k] for k in mapping]]
        fij += ticks[:, None] < ticks[None, :]
    return fij


__all__ = [
    "EvidenceReport",
    "PairEvidence",
    "bidirectional_evidence",
    "pair_evidence",
    "precedence_from_occurrences",
]
