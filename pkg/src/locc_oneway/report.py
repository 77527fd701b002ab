#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""A set of objects modelling the JSON reports written by the tool."""

import json
import math
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel
from typing_extensions import Self

from locc_oneway import __version__
from locc_oneway.mas import MasDecision
from locc_oneway.oracle import GenericityReport
from locc_oneway.protocol import (
    AliceMeasurement,
    BobMeasurement,
    Protocol,
    SimulationStatistics,
)
from locc_oneway.settings import AnalysisSettingsModel
from locc_oneway.states import ComplexPair, Side, complex_to_pairs, pairs_to_complex

ComplexRows = list[list[ComplexPair]]


def _rows_to_pairs(rows: NDArray[np.complex128]) -> ComplexRows:
    """Split each row of complex values into [re, im] pairs."""
    return [complex_to_pairs(row) for row in rows]


def _pairs_to_rows(rows: ComplexRows, dim: int) -> NDArray[np.complex128]:
    """Join rows of [re, im] pairs, keeping the width when there are no rows."""
    if len(rows) == 0:
        return np.zeros((0, dim), dtype=np.complex128)
    return pairs_to_complex(rows)


class VerdictModel(BaseModel):
    """A Pydantic model for the verdict of one initiating party."""

    tag: Literal[
        "distinguishable_projective",
        "not_distinguishable",
        "no_projective_protocol",
        "inconclusive",
    ]
    reason: str
    evidence: dict[str, Any] = {}

    @classmethod
    def from_decision(cls, decision: MasDecision) -> Self:
        """Construct the verdict model of a decision."""
        return cls(
            tag=decision.verdict.value,
            reason=decision.reason.value,
            evidence=decision.evidence,
        )


class BobOutcomeModel(BaseModel):
    """A Pydantic model for the responder's blocks after one outcome."""

    blocks: list[ComplexRows]
    remainder: ComplexRows
    reachable: list[bool]


class ProtocolModel(BaseModel):
    """A Pydantic model for a one-way protocol."""

    side: Literal["A", "B"]
    d: int
    alice_vectors: ComplexRows
    completeness_residual: float
    bob: list[BobOutcomeModel]
    op_violation: float

    @classmethod
    def from_protocol(cls, proto: Protocol) -> Self:
        """Construct the model of a protocol."""
        return cls(
            side=proto.side.value,
            d=int(proto.alice.vectors.shape[1]),
            alice_vectors=_rows_to_pairs(proto.alice.vectors),
            completeness_residual=proto.alice.completeness_residual,
            bob=[
                BobOutcomeModel(
                    blocks=[_rows_to_pairs(block) for block in measurement.blocks],
                    remainder=_rows_to_pairs(measurement.remainder),
                    reachable=list(measurement.reachable),
                )
                for measurement in proto.bob
            ],
            op_violation=proto.op_violation,
        )

    def realise(self) -> Protocol:
        """Construct a protocol from its data model, without re-verifying it."""
        alice = AliceMeasurement(
            Side(self.side),
            _pairs_to_rows(self.alice_vectors, self.d),
            self.completeness_residual,
        )
        bob = tuple(
            BobMeasurement(
                tuple(_pairs_to_rows(block, self.d) for block in outcome.blocks),
                _pairs_to_rows(outcome.remainder, self.d),
            )
            for outcome in self.bob
        )
        return Protocol(alice, bob, self.op_violation)


class SimulationModel(BaseModel):
    """A Pydantic model for the tallies of a simulation."""

    trials: int
    seed: int
    successes: int
    success_rate: float
    success_rate_std_error: float
    state_trials: list[int]
    state_successes: list[int]
    outcome_counts: list[int]
    note: str | None = None

    @classmethod
    def from_statistics(cls, statistics: SimulationStatistics) -> Self:
        """Construct the model of some simulation tallies."""
        return cls(
            trials=statistics.trials,
            seed=statistics.seed,
            successes=statistics.successes,
            success_rate=statistics.success_rate.nominal_value,
            success_rate_std_error=statistics.success_rate.std_dev,
            state_trials=list(statistics.state_trials),
            state_successes=list(statistics.state_successes),
            outcome_counts=list(statistics.outcome_counts),
            note="no trials" if statistics.trials == 0 else None,
        )


class SideReportModel(BaseModel):
    """A Pydantic model for the analysis of one initiating party."""

    side: Literal["A", "B"]
    dim_t: int
    dim_tperp: int
    verdict: VerdictModel
    protocol: ProtocolModel | None = None
    simulation: SimulationModel | None = None


class AnalysisReportModel(BaseModel):
    """A Pydantic model for the report of the `analyze` command."""

    tool_version: str = __version__
    input_digest: str
    d_a: int
    d_b: int
    d: int
    n: int
    settings: AnalysisSettingsModel
    sides: list[SideReportModel]

    def side_report(self, side: Side) -> SideReportModel | None:
        """Get the report for one initiating party, if it was analysed."""
        return next((report for report in self.sides if report.side == side.value), None)


class SimulationReportModel(BaseModel):
    """A Pydantic model for the report of the `simulate` command."""

    tool_version: str = __version__
    input_digest: str
    side: Literal["A", "B"]
    simulation: SimulationModel


class GenericityReportModel(BaseModel):
    """A Pydantic model for the report of the `sample-generic` command."""

    tool_version: str = __version__
    d: int
    n: int
    samples: int
    seed: int
    dim_histogram: dict[int, int]
    det_diagnostics: list[float] | None = None

    @classmethod
    def from_report(cls, report: GenericityReport) -> Self:
        """Construct the model of a genericity report."""
        return cls(
            d=report.d,
            n=report.n,
            samples=report.samples,
            seed=report.seed,
            dim_histogram=report.dim_histogram,
            det_diagnostics=(
                None if report.det_diagnostics is None else list(report.det_diagnostics)
            ),
        )


FLOAT_DIGITS = 17


def format_float(value: float) -> str:
    """Write a float with a fixed number of significant digits, as a JSON number."""
    if not math.isfinite(value):
        return "null"
    text = f"{value:.{FLOAT_DIGITS}g}"
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def _encode(value: Any, level: int) -> str:
    """Encode a JSON-mode dump with two-space indentation."""
    indent, inner = "  " * level, "  " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (
            f"{inner}{json.dumps(str(key), ensure_ascii=False)}: {_encode(item, level + 1)}"
            for key, item in value.items()
        )
        return "{\n" + ",\n".join(items) + f"\n{indent}}}"
    if isinstance(value, list | tuple):
        if not value:
            return "[]"
        items = (f"{inner}{_encode(item, level + 1)}" for item in value)
        return "[\n" + ",\n".join(items) + f"\n{indent}]"
    if isinstance(value, float):
        return format_float(value)
    return json.dumps(value, ensure_ascii=False)


def dump_json(model: BaseModel) -> str:
    """Serialise a report with fields in declaration order and 17 significant digit floats."""
    return _encode(model.model_dump(mode="json"), 0) + "\n"
