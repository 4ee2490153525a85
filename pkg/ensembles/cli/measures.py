import argparse

from ensembles.cli import EXIT_PASS
from ensembles.core.space import PrefixFreeSet, set_mass, string_mass
from ensembles.models.schemas import MeasureReport, StringMass
from ensembles.services.files import load_distribution, read_strings, write_report
from ensembles.utils.helpers import format_string


def cmd_measure(args: argparse.Namespace) -> int:
    """Exact masses of strings, or of the open set a prefix-free set generates."""
    P = load_distribution(args.distribution)
    report = MeasureReport(distribution=P.describe())
    if args.strings:
        report.strings = [StringMass(string=format_string(s), mass=string_mass(P, s))
                          for s in read_strings(args.strings)]
    else:
        members = PrefixFreeSet(read_strings(args.prefix_free_set), P.alphabet)
        report.strings = [StringMass(string=format_string(s), mass=string_mass(P, s)) for s in members]
        report.set_mass = set_mass(P, members)
    write_report(report, args.out)
    return EXIT_PASS


def register(subparsers) -> None:
    parser = subparsers.add_parser("measure", help="exact cylinder and open-set measures")
    parser.add_argument("distribution", help="distribution spec (JSON)")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--strings", help="file of strings, one per line")
    source.add_argument("--prefix-free-set", help="file of the strings of a prefix-free set")
    parser.add_argument("--out", help="report file (default: stdout)")
    parser.set_defaults(handler=cmd_measure)
