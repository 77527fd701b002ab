#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""The pipelines run by each command of the tool."""

import hashlib
import logging
import sys
from argparse import Namespace
from enum import IntEnum
from pathlib import Path

from locc_oneway.exceptions import ProtocolError
from locc_oneway.hermspace import orthonormalize
from locc_oneway.mas import MasDecision, Reason, Verdict, decide
from locc_oneway.oracle import genericity_sample, random_feasible_frame_search
from locc_oneway.protocol import build_protocol, simulate
from locc_oneway.report import (
    AnalysisReportModel,
    GenericityReportModel,
    ProtocolModel,
    SideReportModel,
    SimulationModel,
    SimulationReportModel,
    VerdictModel,
    dump_json,
)
from locc_oneway.settings import AnalysisSettingsModel
from locc_oneway.states import (
    Side,
    SpectralStateSet,
    bell_state_set,
    load_state_set,
    pad_to_square,
    spectral_decompose,
    validate_state_set,
)
from locc_oneway.tspace import build_pair_operators, build_tspaces

logger = logging.getLogger(__name__)

SETTINGS_FLAGS = (
    "side",
    "tol",
    "seed",
    "trials",
    "retries",
    "oracle_attempts",
    "simulate",
    "workers",
)


class ExitCode(IntEnum):
    """The exit codes of the tool."""

    SUCCESS = 0
    REFUTED = 1
    INCONCLUSIVE = 2
    INPUT_ERROR = 3


def resolve_settings(args: Namespace) -> AnalysisSettingsModel:
    """Layer explicit command line flags over the settings file over the defaults."""
    config: Path | None = getattr(args, "config", None)
    base = AnalysisSettingsModel.from_yaml(config) if config is not None else AnalysisSettingsModel()
    return base.updated({flag: getattr(args, flag, None) for flag in SETTINGS_FLAGS})


def write_output(text: str, out: Path | None) -> None:
    """Write a report to a file, or to stdout."""
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _oracle_fallback(
    decision: MasDecision, spec: SpectralStateSet, settings: AnalysisSettingsModel
) -> MasDecision:
    """Upgrade an inconclusive decision when a random search finds a verified frame."""
    ops = build_pair_operators(spec, decision.side)
    frame = random_feasible_frame_search(ops, settings.oracle_attempts, settings.seed, settings.tol)
    if frame is None:
        logger.info("Frame search found nothing on side %s", decision.side.value)
        return decision
    try:
        build_protocol(spec, frame, decision.side, settings.tol)
    except ProtocolError as error:
        logger.warning("Discarding searched frame which fails verification: %s", error)
        return decision
    return MasDecision(
        decision.side,
        decision.dim_tperp,
        Verdict.DISTINGUISHABLE_PROJECTIVE,
        Reason.ORACLE_SEARCH_FOUND_FRAME,
        orthonormalize(frame.projectors(), settings.tol),
        frame,
        decision.evidence,
    )


def analyze_side(
    spec: SpectralStateSet, side: Side, settings: AnalysisSettingsModel
) -> SideReportModel:
    """Run the decision procedure and protocol construction for one initiating party."""
    ops = build_pair_operators(spec, side)
    ts = build_tspaces(ops, settings.tol)
    decision = decide(ts, settings.tol, settings.seed, retries=settings.retries)
    if decision.verdict is Verdict.INCONCLUSIVE and settings.oracle_attempts > 0:
        decision = _oracle_fallback(decision, spec, settings)

    report = SideReportModel(
        side=side.value,
        dim_t=ts.t.count,
        dim_tperp=ts.tperp.count,
        verdict=VerdictModel.from_decision(decision),
    )
    if decision.frame is None:
        return report

    proto = build_protocol(spec, decision.frame, side, settings.tol)
    report.protocol = ProtocolModel.from_protocol(proto)
    if settings.simulate:
        statistics = simulate(
            spec, proto, settings.trials, settings.seed, workers=settings.workers
        )
        report.simulation = SimulationModel.from_statistics(statistics)
    return report


def analyze(document: bytes, settings: AnalysisSettingsModel) -> AnalysisReportModel:
    """Run the full pipeline on a state set document."""
    state_set = load_state_set(document, settings.tol)
    spec = spectral_decompose(pad_to_square(state_set), settings.tol)
    logger.info("Analysing %d states with padded dimension %d", spec.n, spec.dim)
    return AnalysisReportModel(
        input_digest=hashlib.sha256(document).hexdigest(),
        d_a=state_set.d_a,
        d_b=state_set.d_b,
        d=spec.dim,
        n=spec.n,
        settings=settings,
        sides=[analyze_side(spec, side, settings) for side in settings.sides],
    )


def analysis_exit_code(report: AnalysisReportModel) -> ExitCode:
    """Get the exit code of a report, keeping the verdict of each party separate."""
    tags = {side.verdict.tag for side in report.sides}
    if Verdict.DISTINGUISHABLE_PROJECTIVE.value in tags:
        return ExitCode.SUCCESS
    if Verdict.INCONCLUSIVE.value in tags:
        return ExitCode.INCONCLUSIVE
    return ExitCode.REFUTED


def run_analyze(args: Namespace) -> int:
    """Analyse a state set file and write the report."""
    settings = resolve_settings(args)
    report = analyze(args.input.read_bytes(), settings)
    write_output(dump_json(report), args.out)
    for side in report.sides:
        print(
            f"Side {side.side}: dim T = {side.dim_t}, dim T-perp = {side.dim_tperp}, "
            f"{side.verdict.tag} ({side.verdict.reason})",
            file=sys.stderr,
        )
    return analysis_exit_code(report)


def run_simulate(args: Namespace) -> int:
    """Simulate a protocol, from a report file or from a fresh analysis."""
    settings = resolve_settings(args)
    document = args.input.read_bytes()
    if args.protocol is not None:
        found = AnalysisReportModel.model_validate_json(args.protocol.read_bytes())
    else:
        found = analyze(document, settings.updated({"simulate": False}))
    candidates = [
        side.protocol
        for side in found.sides
        if side.protocol is not None and (settings.side in ("both", side.side))
    ]
    if not candidates:
        raise ProtocolError("No protocol was found for the requested side!")
    model = candidates[0]

    spec = spectral_decompose(pad_to_square(load_state_set(document, settings.tol)), settings.tol)
    if model.d != spec.dim:
        raise ProtocolError(f"Protocol is for d={model.d}, but the states have d={spec.dim}!")
    statistics = simulate(
        spec, model.realise(), settings.trials, settings.seed, workers=settings.workers
    )
    report = SimulationReportModel(
        input_digest=hashlib.sha256(document).hexdigest(),
        side=model.side,
        simulation=SimulationModel.from_statistics(statistics),
    )
    write_output(dump_json(report), args.out)
    print(f"Success rate {statistics.success_rate}", file=sys.stderr)
    return ExitCode.SUCCESS if statistics.perfect else ExitCode.REFUTED


def run_sample_generic(args: Namespace) -> int:
    """Run the genericity sampler and write its report."""
    report = genericity_sample(
        args.d, args.n, args.samples, args.seed, det=args.det, workers=args.workers
    )
    write_output(dump_json(GenericityReportModel.from_report(report)), args.out)
    return ExitCode.SUCCESS


def parse_indices(text: str) -> list[tuple[int, int]]:
    """Parse comma separated Bell indices, each either `nm` or `n:m`."""
    indices = []
    for token in (part.strip() for part in text.split(",")):
        if ":" in token:
            first, _, second = token.partition(":")
        elif len(token) == 2:  # noqa: PLR2004
            first, second = token[0], token[1]
        else:
            raise ValueError(f"Cannot parse Bell index '{token}'!")
        indices.append((int(first), int(second)))
    return indices


def run_gen_fixture(args: Namespace) -> int:
    """Write a state set file of generalised Bell states."""
    state_set = validate_state_set(bell_state_set(parse_indices(args.indices), args.d))
    write_output(state_set.to_json() + "\n", args.out)
    return ExitCode.SUCCESS
