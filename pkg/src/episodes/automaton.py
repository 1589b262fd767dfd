"""
Occurrence-tracking automata for injective episodes.

A state is the pair (accepted set, wait set), both held as bitmasks over the
episode's node indices. States are built lazily from the episode's parent
masks; the full automaton is never materialized except by
:func:`reachable_states`, which exists for property checks on small episodes.
"""

import logging
from collections import deque
from collections.abc import Iterable
from typing import NamedTuple

from src.episodes.errors import EpisodeError
from src.episodes.model import Episode, bit_indices

logger = logging.getLogger(__name__)


class AutomatonState(NamedTuple):
    q: int
    w: int


def enabled_from(alpha: Episode, candidates: int, q: int) -> int:
    """Subset of ``candidates`` (outside ``q``) whose parents all lie in ``q``."""
    out = 0
    parents = alpha.parents
    for j in bit_indices(candidates & ~q):
        if parents[j] & ~q == 0:
            out |= 1 << j
    return out


def wait_from_accepted(alpha: Episode, q: int) -> int:
    """Least elements of the nodes not yet accepted."""
    return enabled_from(alpha, alpha.full_mask, q)


def initial_state(alpha: Episode) -> AutomatonState:
    return AutomatonState(0, wait_from_accepted(alpha, 0))


def is_final(alpha: Episode, s: AutomatonState) -> bool:
    return s.q == alpha.full_mask


def step(alpha: Episode, s: AutomatonState, accepted: int) -> AutomatonState:
    """Accept every node in ``accepted & s.w`` at once.

    Nodes enabled by this step are added to the wait set but are not
    accepted in the same step, which is what simultaneous events require.
    """
    acc = accepted & s.w
    if not acc:
        return s
    q = s.q | acc
    children = 0
    for j in bit_indices(acc):
        children |= alpha.order[j]
    w = (s.w & ~acc) | enabled_from(alpha, children, q)
    return AutomatonState(q, w)


def transition(alpha: Episode, s: AutomatonState, symbol: str) -> AutomatonState:
    """Single-symbol transition; symbols not currently awaited are self-loops."""
    j = alpha.index.get(symbol)
    if j is None:
        return s
    return step(alpha, s, 1 << j)


def step_symbols(alpha: Episode, s: AutomatonState, symbols: Iterable[str]) -> AutomatonState:
    """Transition on a set of symbols sharing one timestamp."""
    mask = 0
    for symbol in symbols:
        j = alpha.index.get(symbol)
        if j is not None:
            mask |= 1 << j
    return step(alpha, s, mask)


def run(alpha: Episode, word: Iterable[str], s: AutomatonState | None = None) -> AutomatonState:
    """Feed ``word`` one symbol at a time, from the start state by default."""
    state = initial_state(alpha) if s is None else s
    for symbol in word:
        state = transition(alpha, state, symbol)
    return state


def is_valid_accepted_set(alpha: Episode, q: int) -> bool:
    """True when ``q`` is closed downward under the parent relation."""
    parents = alpha.parents
    return all(parents[j] & ~q == 0 for j in bit_indices(q))


def is_valid_wait_set(alpha: Episode, w: int) -> bool:
    """True when no member of ``w`` has a parent inside ``w``."""
    parents = alpha.parents
    return all(parents[j] & w == 0 for j in bit_indices(w))


def accepted_from_wait(alpha: Episode, w: int) -> int:
    """Recover the accepted set of the unique state waiting on ``w``.

    :raises EpisodeError: If ``w`` is empty or not a valid wait set.
    """
    if not w:
        raise EpisodeError("The empty wait set belongs to the final state only")
    if not is_valid_wait_set(alpha, w):
        raise EpisodeError(f"Wait set {w:#b} is not an antichain of {alpha}")
    parents = alpha.parents
    q = 0
    for j in bit_indices(alpha.full_mask & ~w):
        if parents[j] & w == 0:
            q |= 1 << j
    return q


def reachable_states(alpha: Episode) -> set[AutomatonState]:
    """Breadth-first search over single-symbol transitions from the start state."""
    start = initial_state(alpha)
    seen = {start}
    frontier = deque([start])
    while frontier:
        s = frontier.popleft()
        for j in bit_indices(s.w):
            nxt = step(alpha, s, 1 << j)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    logger.debug(f"{alpha} has {len(seen)} reachable states")
    return seen


def transfer_word(alpha: Episode, q_from: int, q_to: int) -> list[str]:
    """A word of length ``|q_to - q_from|`` leading from one state to another.

    At every step the lowest-index awaited node of ``q_to - q_from`` is
    read. Both sets must be valid accepted sets with ``q_from`` inside
    ``q_to``.
    """
    if q_from & ~q_to:
        raise EpisodeError("Source accepted set must be contained in the target")
    if not (is_valid_accepted_set(alpha, q_from) and is_valid_accepted_set(alpha, q_to)):
        raise EpisodeError("Both accepted sets must be downward closed")
    state = AutomatonState(q_from, wait_from_accepted(alpha, q_from))
    word = []
    while state.q != q_to:
        ready = state.w & q_to & ~state.q
        j = bit_indices(ready)[0]
        word.append(alpha.events[j])
        state = step(alpha, state, 1 << j)
    return word


__all__ = [
    "AutomatonState",
    "accepted_from_wait",
    "enabled_from",
    "initial_state",
    "is_final",
    "is_valid_accepted_set",
    "is_valid_wait_set",
    "reachable_states",
    "run",
    "step",
    "step_symbols",
    "transfer_word",
    "transition",
    "wait_from_accepted",
]
