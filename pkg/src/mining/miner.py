"""
Levelwise mining of frequent injective episodes.

Each level counts its candidates in one pass over the stream, keeps the
episodes whose frequency exceeds the threshold (and, in levelwise evidence
mode, whose bidirectional evidence reaches its threshold), and joins the
survivors into the next level's candidates.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TextIO

from pydantic import BaseModel, Field, model_validator

from src.episodes.model import ALPHABET_ORDER, MAX_NODES, Episode, format_episode, most_specific
from src.episodes.stream import EventSequence
from src.mining.candidates import CandidateBook, GenerationMode, generate_candidates, level_one
from src.mining.counter import count_frequencies
from src.mining.evidence import bidirectional_evidence
from src.tracing import MiningAttributes, get_tracer, traced

logger = logging.getLogger(__name__)
tracer = get_tracer(__name__)


class HMode(str, Enum):
    """How the evidence threshold is applied."""

    OFF = "off"
    POSTFILTER = "postfilter"
    LEVELWISE = "levelwise"


class MiningConfig(BaseModel):
    """Configuration of a mining run.

    Attributes:
        f_th: Episodes need a frequency strictly above this value.
        h_th: Evidence threshold, required unless ``h_mode`` is off.
        h_mode: ``levelwise`` prunes the next level's input, ``postfilter``
            only filters the emitted reports.
        expiry: Largest occurrence span in ticks; ``None`` is unlimited.
        mode: Episode class and structural bounds for candidate generation.
        max_level: Largest episode size to mine.
        workers: Processes used for counting.
        most_specific: Emit only the most specific episodes of each level.
        debug: Enable the counter's nesting and replay checks.
    """

    f_th: int = Field(..., ge=0, description="Frequency threshold (strict)")
    h_th: float | None = Field(None, ge=0.0, le=1.0, description="Evidence threshold")
    h_mode: HMode = Field(HMode.OFF, description="Where the evidence threshold applies")
    expiry: int | None = Field(None, ge=0, description="Expiry time in ticks")
    mode: GenerationMode = Field(default_factory=GenerationMode, description="Generation mode")
    max_level: int = Field(MAX_NODES, ge=1, le=MAX_NODES, description="Largest episode size")
    workers: int = Field(1, ge=1, le=256, description="Counting processes")
    most_specific: bool = Field(False, description="Keep only most specific episodes")
    debug: bool = Field(False, description="Counter self-checks")

    @model_validator(mode="after")
    def check_evidence_threshold(self) -> MiningConfig:
        """An evidence mode without a threshold has nothing to compare against."""
        if self.h_mode is not HMode.OFF and self.h_th is None:
            raise ValueError(f"h_mode={self.h_mode.value} requires h_th")
        return self


@dataclass(frozen=True)
class ScoredEpisode:
    episode: Episode
    freq: int
    h: float


@dataclass
class LevelReport:
    """Outcome of one level: how many candidates, which survived."""

    level: int
    candidates: int
    frequent: int
    episodes: list[ScoredEpisode] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.frequent != len(self.episodes) or self.frequent > self.candidates:
            raise ValueError(
                f"Level {self.level} report counts {self.frequent} survivors of {self.candidates} "
                f"candidates but lists {len(self.episodes)}"
            )


def _survivors(book: CandidateBook, keep: list[bool], config: MiningConfig) -> list[ScoredEpisode]:
    scored = [
        ScoredEpisode(book.episodes[k], book.freq[k], book.h[k]) for k in range(len(book)) if keep[k]
    ]
    if config.most_specific:
        specific = set(most_specific(s.episode for s in scored))
        scored = [s for s in scored if s.episode in specific]
    return scored


@traced("mine")
def mine(stream: EventSequence, config: MiningConfig) -> list[LevelReport]:
    """Run the levelwise loop until ``max_level`` or until nothing survives.

    :param stream: The event stream to mine.
    :param config: Thresholds, expiry and generation mode.
    :return: One report per mined level.
    """
    logger.info(
        f"Mining {len(stream)} events over {len(stream.alphabet)} event-types "
        f"(f_th={config.f_th}, h_mode={config.h_mode.value}, expiry={config.expiry}, "
        f"mode={config.mode.kind.value})"
    )
    reports: list[LevelReport] = []
    book = level_one(stream.alphabet.symbols)
    level = 1
    while True:
        with tracer.start_as_current_span(f"level-{level}") as span:
            span.set_attribute(MiningAttributes.LEVEL, level)
            span.set_attribute(MiningAttributes.CANDIDATES, len(book))
            span.set_attribute(MiningAttributes.MODE, config.mode.kind.value)
            span.set_attribute(MiningAttributes.H_MODE, config.h_mode.value)
            if config.expiry is not None:
                span.set_attribute(MiningAttributes.EXPIRY, config.expiry)
            span.set_attribute(MiningAttributes.STREAM_EVENTS, len(stream))
            span.set_attribute(MiningAttributes.STREAM_ALPHABET, len(stream.alphabet))
            if not len(book):
                reports.append(LevelReport(level, 0, 0))
                logger.info(f"Level {level}: no candidates, stopping")
                break

            results = count_frequencies(
                book.episodes, stream, config.expiry, workers=config.workers, debug=config.debug
            )
            for k, result in enumerate(results):
                book.freq[k] = result.freq
                book.h[k] = bidirectional_evidence(result.episode, result).h

            frequent = [f > config.f_th for f in book.freq]
            h_th = config.h_th if config.h_th is not None else 0.0
            passing = [ok and book.h[k] >= h_th for k, ok in enumerate(frequent)]
            next_keep = passing if config.h_mode is HMode.LEVELWISE else frequent
            emit_keep = frequent if config.h_mode is HMode.OFF else passing

            survivors = _survivors(book, emit_keep, config)
            reports.append(LevelReport(level, len(book), len(survivors), survivors))
            span.set_attribute(MiningAttributes.FREQUENT, sum(frequent))
            span.set_attribute(MiningAttributes.SURVIVORS, len(survivors))
            logger.info(
                f"Level {level}: {len(book)} candidates, {sum(frequent)} frequent, "
                f"{len(survivors)} reported"
            )

            next_input = book.select(next_keep)
            if level >= config.max_level or not len(next_input):
                break
            book = generate_candidates(next_input, config.mode)
            level += 1
    return reports


def write_reports(target: str | Path | TextIO, reports: Iterable[LevelReport]) -> None:
    """Write level reports as ``# level=`` headers followed by scored episodes."""
    lines = [f"# alphabet-order={ALPHABET_ORDER}"]
    for report in reports:
        lines.append(
            f"# level={report.level} candidates={report.candidates} frequent={report.frequent}"
        )
        for scored in report.episodes:
            lines.append(f"{format_episode(scored.episode)}\t{scored.freq}\t{scored.h:.6f}")
    text = "\n".join(lines) + "\n"
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


__all__ = ["HMode", "LevelReport", "MiningConfig", "ScoredEpisode", "mine", "write_reports"]
