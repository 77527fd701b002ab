#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""The main function for the one-way LOCC tool."""

import logging
import sys
from argparse import ArgumentParser, Namespace
from collections.abc import Callable
from pathlib import Path
from typing import NoReturn

from pydantic import ValidationError

from locc_oneway import __version__
from locc_oneway.analysis import (
    ExitCode,
    run_analyze,
    run_gen_fixture,
    run_sample_generic,
    run_simulate,
)
from locc_oneway.exceptions import LoccError

COMMANDS: dict[str, Callable[[Namespace], int]] = {
    "analyze": run_analyze,
    "simulate": run_simulate,
    "sample-generic": run_sample_generic,
    "gen-fixture": run_gen_fixture,
}


class _ArgumentParser(ArgumentParser):
    """An argument parser reporting usage errors with the input error exit code."""

    def error(self, message: str) -> NoReturn:
        """Print the usage and exit with the input error code."""
        self.print_usage(sys.stderr)
        self.exit(ExitCode.INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _add_analysis_arguments(parser: ArgumentParser) -> None:
    """Add the arguments shared by commands which analyse a state set."""
    parser.add_argument("input", type=Path, help="the path to the state set JSON file")
    # Defaults of None let the settings file fill in anything not given here
    parser.add_argument(
        "--side",
        choices=("A", "B", "both"),
        default=None,
        help="the initiating party to analyse (default: both)",
    )
    parser.add_argument(
        "--tol", type=float, default=None, help="the numerical rank tolerance (default: 1e-10)"
    )
    parser.add_argument("--seed", type=int, default=None, help="the random seed (default: 0)")
    parser.add_argument(
        "--trials", type=int, default=None, help="the number of simulated trials (default: 10000)"
    )
    parser.add_argument(
        "--retries",
        type=int,
        default=None,
        help="the extra attempts at simultaneous diagonalisation (default: 8)",
    )
    parser.add_argument(
        "--workers", type=int, default=None, help="the number of simulation threads (default: 1)"
    )
    parser.add_argument(
        "--config", type=Path, default=None, help="the path to a YAML settings file"
    )


def get_parser() -> ArgumentParser:
    """Get the argument parser for the tool."""
    parser = _ArgumentParser(
        description="Decide whether orthogonal bipartite states are one-way LOCC distinguishable."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log the pipeline steps to stderr"
    )
    sub_parsers = parser.add_subparsers(dest="command", required=True)
    parser_analyze = sub_parsers.add_parser(
        "analyze", help="decide and construct a protocol for a state set"
    )
    parser_simulate = sub_parsers.add_parser(
        "simulate", help="run a protocol on randomly drawn states"
    )
    parser_sample = sub_parsers.add_parser(
        "sample-generic", help="histogram dim T-perp over Haar-random state sets"
    )
    parser_fixture = sub_parsers.add_parser(
        "gen-fixture", help="write a state set file of generalised Bell states"
    )

    for sub_parser in (parser_analyze, parser_simulate, parser_sample, parser_fixture):
        sub_parser.add_argument(
            "--out",
            type=Path,
            default=None,
            help="the path to write the report to (default: stdout)",
        )
    for sub_parser in (parser_analyze, parser_simulate):
        _add_analysis_arguments(sub_parser)
    parser_analyze.add_argument(
        "--oracle-attempts",
        type=int,
        default=None,
        help="the random frame search restarts for inconclusive sides (default: 0)",
    )
    parser_analyze.add_argument(
        "--simulate",
        action="store_const",
        const=True,
        default=None,
        help="simulate every protocol found",
    )
    parser_simulate.add_argument(
        "--protocol",
        type=Path,
        default=None,
        help="the path to an analysis report holding the protocol (default: analyse afresh)",
    )

    parser_sample.add_argument("--d", type=int, required=True, help="the local dimension")
    parser_sample.add_argument("--n", type=int, required=True, help="the number of states")
    parser_sample.add_argument(
        "--samples", type=int, required=True, help="the number of random state sets"
    )
    parser_sample.add_argument("--seed", type=int, default=0, help="the random seed")
    parser_sample.add_argument(
        "--det", action="store_true", help="also report Det(M M^T) for every sample"
    )
    parser_sample.add_argument("--workers", type=int, default=1, help="the number of threads")

    parser_fixture.add_argument("--d", type=int, required=True, help="the local dimension")
    parser_fixture.add_argument(
        "--indices",
        required=True,
        help="comma separated Bell indices, as `nm` digit pairs or `n:m`",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run the tool."""
    args = get_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )

    try:
        return COMMANDS[args.command](args)
    except (LoccError, ValidationError, OSError, ValueError) as error:
        print(f"Error: {error}", file=sys.stderr)
        return ExitCode.INPUT_ERROR
