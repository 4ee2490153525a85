"""`gen` and `transform`: producing stream files."""
import argparse

from loguru import logger

from ensembles.cli import EXIT_PASS
from ensembles.core.transform import sample_ensemble
from ensembles.services.files import build_distribution, load_distribution, load_model, load_stream, write_stream
from ensembles.services.registry import registry
from ensembles.models.schemas import PipelineConfig


def cmd_gen(args: argparse.Namespace) -> int:
    P = load_distribution(args.distribution)
    stream = sample_ensemble(P, args.seed)
    written = write_stream(stream.prefix(args.n), args.out)
    logger.info(f"wrote {written} draws from {P.describe()} (seed {args.seed})")
    return EXIT_PASS


def cmd_transform(args: argparse.Namespace) -> int:
    config = load_model(args.pipeline, PipelineConfig)
    if args.input:
        P = build_distribution(config.source, origin=args.pipeline) if config.source else None
        source = load_stream(args.input, distribution=P)
    elif config.source is not None:
        if config.n is None:
            raise ValueError(f"{args.pipeline}: a sampled source needs n")
        source = sample_ensemble(build_distribution(config.source, origin=args.pipeline), config.seed)
    else:
        raise ValueError("give --in or a source distribution in the pipeline config")

    result = registry.apply_all(source, config.ops)
    # a recorded input ends, so its image ends too; sampled sources are cut at n
    symbols = result.prefix(config.n) if config.n is not None else list(result.clone())
    out = args.out or config.output
    written = write_stream(symbols, out, provenance=result.provenance.describe())
    logger.info(f"transform wrote {written} symbols: {result.provenance.describe()}")
    return EXIT_PASS


def register(subparsers) -> None:
    gen = subparsers.add_parser("gen", help="sample a stream from a distribution spec")
    gen.add_argument("distribution", help="distribution spec (JSON)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--n", type=int, required=True, help="number of draws")
    gen.add_argument("--out", help="stream file (default: stdout)")
    gen.set_defaults(handler=cmd_gen)

    transform = subparsers.add_parser("transform", help="apply a pipeline of stream operations")
    transform.add_argument("pipeline", help="pipeline config (JSON)")
    transform.add_argument("--in", dest="input", help="input stream file; default samples the config source")
    transform.add_argument("--out", help="stream file (default: config output, else stdout)")
    transform.set_defaults(handler=cmd_transform)
