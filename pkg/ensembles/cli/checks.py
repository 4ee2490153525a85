"""`verify-test`, `lln` and `independence`: verdict commands.

Each writes a JSON report and returns 0 on pass, 1 on fail.
"""
import argparse
import json
from typing import Any, List

from loguru import logger

from ensembles.cli import verdict
from ensembles.core.mltest import verify_test
from ensembles.core.stats import MIN_LLN_SAMPLES, event_independence_check, independence_check, lln_check
from ensembles.core.transform import EnsembleStream
from ensembles.models.schemas import TestDefinition
from ensembles.services.files import build_distribution, load_distribution, load_model, load_stream, write_report
from ensembles.services.registry import explicit_test, registry
from ensembles.utils.helpers import format_rational, parse_symbol

DEFAULT_GENERATED_LEVELS = 5


def _length(stream: EnsembleStream) -> int:
    return sum(1 for _ in stream.clone())


def _named(text: str) -> Any:
    """A bare name, or a JSON object such as {"name": "set", "members": [0]}."""
    return json.loads(text) if text.lstrip().startswith("{") else text


def cmd_verify_test(args: argparse.Namespace) -> int:
    definition = load_model(args.test, TestDefinition)
    P = build_distribution(definition.distribution, origin=args.test)
    if definition.levels is not None:
        T = explicit_test(P, definition.levels)
        default_depth = max(definition.levels) if definition.levels else 1
    else:
        T = registry.test(P, definition.generator, definition.params)
        default_depth = DEFAULT_GENERATED_LEVELS
    up_to = args.up_to_level or definition.up_to_level or default_depth
    report = verify_test(T, up_to)
    write_report(report, args.out)
    violation = report.first_violation
    if violation is not None:
        reason = "not prefix-free" if not violation.prefix_free else f"mass {format_rational(violation.mass)}"
        logger.error(f"{T.name}: level {violation.level} violates the bound ({reason})")
    return verdict(report.passed)


def cmd_lln(args: argparse.Namespace) -> int:
    P = load_distribution(args.distribution)
    stream = load_stream(args.stream, distribution=P)
    n = args.n or _length(stream)
    if n < MIN_LLN_SAMPLES:
        raise ValueError(f"{args.stream}: {n} symbols, lln needs at least {MIN_LLN_SAMPLES}")
    symbols = [parse_symbol(s) for s in args.symbols] if args.symbols else None
    report = lln_check(stream, P, n, symbols=symbols, k_sigma=args.k_sigma)
    write_report(report, args.out)
    for row in report.rows:
        if not row.passed:
            logger.warning(f"symbol {row.symbol}: frequency {row.frequency:.6f} vs {float(row.target):.6f}")
    return verdict(report.passed)


def cmd_independence(args: argparse.Namespace) -> int:
    if args.events:
        if len(args.streams) != 1:
            raise ValueError("--events takes exactly one stream")
        P = load_distribution(args.dist[0]) if args.dist else None
        stream = load_stream(args.streams[0], distribution=P)
        events = [registry.event(_named(text)) for text in args.events]
        n = args.n or _length(stream)
        report = event_independence_check(stream, events, n, P=P, threshold=args.threshold)
    else:
        if len(args.dist or []) != len(args.streams):
            raise ValueError("give one --dist per stream")
        distributions = [load_distribution(path) for path in args.dist]
        streams: List[EnsembleStream] = [load_stream(path, distribution=P)
                                         for path, P in zip(args.streams, distributions)]
        n = args.n or min(_length(s) for s in streams)
        report = independence_check(streams, distributions, n, width=args.width, threshold=args.threshold)
    write_report(report, args.out)
    return verdict(report.passed)


def register(subparsers) -> None:
    verify = subparsers.add_parser("verify-test", help="check the levels of a test against 2^-n")
    verify.add_argument("test", help="test definition (JSON)")
    verify.add_argument("--up-to-level", type=int)
    verify.add_argument("--out", help="report file (default: stdout)")
    verify.set_defaults(handler=cmd_verify_test)

    lln = subparsers.add_parser("lln", help="symbol frequencies of a stream against a distribution")
    lln.add_argument("stream", help="stream file")
    lln.add_argument("distribution", help="distribution spec (JSON)")
    lln.add_argument("--n", type=int, help="prefix length (default: whole file)")
    lln.add_argument("--symbols", nargs="+", help="symbols to check (default: first five)")
    lln.add_argument("--k-sigma", type=float)
    lln.add_argument("--out", help="report file (default: stdout)")
    lln.set_defaults(handler=cmd_lln)

    independence = subparsers.add_parser("independence", help="independence of streams, or of events on one stream")
    independence.add_argument("streams", nargs="+", help="stream files")
    independence.add_argument("--dist", nargs="+", help="distribution spec per stream")
    independence.add_argument("--events", nargs="+", help="event names or JSON specs (single-stream mode)")
    independence.add_argument("--n", type=int)
    independence.add_argument("--width", type=int, default=4)
    independence.add_argument("--threshold", type=float)
    independence.add_argument("--out", help="report file (default: stdout)")
    independence.set_defaults(handler=cmd_independence)
