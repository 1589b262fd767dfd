"""
Command-line front end.

Subcommands:
    generate  write a synthetic stream and its manifest
    mine      levelwise mining into a report file
    count     frequency and evidence of listed episodes
    oracle    brute-force counts of listed episodes
    metrics   longest maximal path and maximal path count of listed episodes

Exit status is 0 on success, 1 for argument, I/O and file syntax errors and
2 for invalid values.
"""

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn, TextIO

from dotenv import load_dotenv

from src.episodes.errors import EpisodeSyntaxError, StreamFormatError
from src.episodes.model import Episode, format_episode, read_episodes, structural_metrics
from src.episodes.stream import EventSequence, read_stream, write_stream
from src.mining.candidates import GenerationMode, ModeKind
from src.mining.counter import count_frequencies
from src.mining.evidence import bidirectional_evidence
from src.mining.miner import HMode, MiningConfig, mine, write_reports
from src.oracle import max_nonoverlapped
from src.synthetic import GenConfig, Sampler, generate_stream, write_manifest
from src.tracing import get_tracer, record_exception, setup_tracing

logger = logging.getLogger(__name__)
tracer = get_tracer(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2


class CliUsageError(Exception):
    """Raised instead of exiting when argv cannot be parsed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise CliUsageError(f"{self.prog}: error: {message}")


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="episode-miner", description="Frequent injective episode mining")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: $EPISODE_MINER_LOG_LEVEL or WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="Generate a synthetic stream")
    gen.add_argument("--patterns", required=True, type=Path, help="Episodes to embed")
    gen.add_argument("--eta", required=True, type=float)
    gen.add_argument("--p", required=True, type=float)
    gen.add_argument("--rho", required=True, type=float)
    gen.add_argument("--alphabet", required=True, type=int)
    gen.add_argument("--ticks", required=True, type=int)
    gen.add_argument("--seed", required=True, type=_non_negative)
    gen.add_argument("--sampler", choices=[s.value for s in Sampler], default=Sampler.MINIMAL.value)
    gen.add_argument("--out", required=True, type=Path)

    mine_p = sub.add_parser("mine", help="Mine frequent episodes")
    mine_p.add_argument("--data", required=True, type=Path)
    mine_p.add_argument("--fth", required=True, type=_non_negative)
    mine_p.add_argument("--hth", type=float)
    mine_p.add_argument("--hmode", choices=[m.value for m in HMode])
    mine_p.add_argument("--expiry", type=_non_negative)
    mine_p.add_argument("--mode", choices=[m.value for m in ModeKind], default=ModeKind.GENERAL.value)
    mine_p.add_argument("--lmax", type=int)
    mine_p.add_argument("--nmax", type=int)
    mine_p.add_argument("--max-level", type=int, dest="max_level")
    mine_p.add_argument("--workers", type=int, default=1)
    mine_p.add_argument("--most-specific", action="store_true", dest="most_specific")
    mine_p.add_argument("--out", required=True, type=Path)

    for name, help_text in (("count", "Count listed episodes"), ("oracle", "Brute-force counts")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--data", required=True, type=Path)
        p.add_argument("--episodes", required=True, type=Path)
        p.add_argument("--expiry", type=_non_negative)

    met = sub.add_parser("metrics", help="Structural metrics of listed episodes")
    met.add_argument("--episodes", required=True, type=Path)
    return parser


def _warn_unknown(episodes: Sequence[Episode], stream: EventSequence) -> None:
    missing = sorted({s for alpha in episodes for s in alpha.events if s not in stream.alphabet})
    if missing:
        logger.warning(f"Event-types absent from the stream: {' '.join(missing)}")


def _cmd_generate(args: argparse.Namespace, out: TextIO) -> int:
    config = GenConfig(
        patterns=read_episodes(args.patterns),
        eta=args.eta,
        p=args.p,
        rho=args.rho,
        alphabet_size=args.alphabet,
        ticks=args.ticks,
        seed=args.seed,
        sampler=Sampler(args.sampler),
    )
    seq = generate_stream(config)
    write_stream(args.out, seq)
    write_manifest(Path(f"{args.out}.manifest"), config, events=len(seq))
    return EXIT_OK


def _cmd_mine(args: argparse.Namespace, out: TextIO) -> int:
    h_mode = args.hmode or (HMode.LEVELWISE.value if args.hth is not None else HMode.OFF.value)
    settings = {
        "f_th": args.fth,
        "h_th": args.hth,
        "h_mode": h_mode,
        "expiry": args.expiry,
        "mode": GenerationMode(kind=args.mode, lmax_bound=args.lmax, nmax_bound=args.nmax),
        "workers": args.workers,
        "most_specific": args.most_specific,
    }
    if args.max_level is not None:
        settings["max_level"] = args.max_level
    config = MiningConfig(**settings)
    stream = read_stream(args.data)
    reports = mine(stream, config)
    write_reports(args.out, reports)
    return EXIT_OK


def _by_size(episodes: Sequence[Episode]) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for k, alpha in enumerate(episodes):
        groups.setdefault(alpha.size, []).append(k)
    return groups


def _cmd_count(args: argparse.Namespace, out: TextIO) -> int:
    stream = read_stream(args.data)
    episodes = read_episodes(args.episodes)
    _warn_unknown(episodes, stream)
    lines: list[str | None] = [None] * len(episodes)
    for members in _by_size(episodes).values():
        results = count_frequencies([episodes[k] for k in members], stream, args.expiry)
        for k, result in zip(members, results, strict=True):
            h = bidirectional_evidence(result.episode, result).h
            lines[k] = f"{format_episode(result.episode)}\t{result.freq}\t{h:.6f}"
    for line in lines:
        out.write(f"{line}\n")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace, out: TextIO) -> int:
    stream = read_stream(args.data)
    episodes = read_episodes(args.episodes)
    _warn_unknown(episodes, stream)
    for alpha in episodes:
        out.write(f"{format_episode(alpha)}\t{max_nonoverlapped(alpha, stream, args.expiry)}\n")
    return EXIT_OK


def _cmd_metrics(args: argparse.Namespace, out: TextIO) -> int:
    for alpha in read_episodes(args.episodes):
        metrics = structural_metrics(alpha)
        out.write(f"{format_episode(alpha)}\t{metrics.lmax}\t{metrics.nmax}\n")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "mine": _cmd_mine,
    "count": _cmd_count,
    "oracle": _cmd_oracle,
    "metrics": _cmd_metrics,
}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    """Parse ``argv``, dispatch the subcommand and map failures to exit codes."""
    out = out or sys.stdout
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except CliUsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE

    level = args.log_level or os.environ.get("EPISODE_MINER_LOG_LEVEL", "WARNING")
    logging.basicConfig(
        level=level.upper(), format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    setup_tracing()

    with tracer.start_as_current_span(f"cli.{args.command}"):
        try:
            return _COMMANDS[args.command](args, out)
        except (EpisodeSyntaxError, StreamFormatError, OSError) as e:
            record_exception(e, escaped=False)
            logger.error(f"{args.command} failed: {str(e)}")
            sys.stderr.write(f"error: {e}\n")
            return EXIT_USAGE
        except ValueError as e:
            record_exception(e, escaped=False)
            logger.error(f"{args.command} rejected its input: {str(e)}")
            sys.stderr.write(f"invalid: {e}\n")
            return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
