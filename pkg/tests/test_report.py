#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# mypy: disable-error-code="misc"
"""Unit tests for the settings and report models."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from locc_oneway.analysis import ExitCode, analysis_exit_code, analyze
from locc_oneway.mas import decide
from locc_oneway.protocol import build_protocol, simulate
from locc_oneway.report import AnalysisReportModel, ProtocolModel, dump_json, format_float
from locc_oneway.settings import AnalysisSettingsModel
from locc_oneway.states import (
    EXAMPLE_ONE_INDICES,
    Side,
    StateSet,
    bell_state_set,
    spectral_decompose,
)
from locc_oneway.tspace import build_pair_operators, build_tspaces
from locc_oneway.uncertainties import binomial_rate


def test_settings_defaults() -> None:
    """Test the default settings analyse both parties."""
    settings = AnalysisSettingsModel()
    assert settings.sides == (Side.A, Side.B)
    assert settings.tol == 1e-10
    assert settings.trials == 10_000


def test_settings_updated_skips_missing_flags() -> None:
    """Test only given overrides replace settings, and are validated."""
    settings = AnalysisSettingsModel(seed=3).updated({"seed": None, "side": "B"})
    assert settings.seed == 3
    assert settings.sides == (Side.B,)
    with pytest.raises(ValidationError):
        settings.updated({"tol": -1.0})


def test_settings_from_yaml(tmp_path: Path) -> None:
    """Test settings are read from YAML and unknown keys are refused."""
    path = tmp_path / "settings.yaml"
    path.write_text("tol: 1.0e-9\nworkers: 2\n", encoding="utf-8")
    settings = AnalysisSettingsModel.from_yaml(path)
    assert (settings.tol, settings.workers) == (1e-9, 2)
    path.write_text("", encoding="utf-8")
    assert AnalysisSettingsModel.from_yaml(path) == AnalysisSettingsModel()
    path.write_text("tolerance: 1\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        AnalysisSettingsModel.from_yaml(path)


def test_binomial_rate() -> None:
    """Test the success rate carries its binomial standard error."""
    rate = binomial_rate(75, 100)
    assert rate.nominal_value == 0.75
    assert rate.std_dev == pytest.approx(np.sqrt(0.75 * 0.25 / 100))
    assert "±" in str(rate)
    assert binomial_rate(0, 0).nominal_value == 1.0


def test_protocol_model_realises_the_protocol() -> None:
    """Test a protocol read back from its model still simulates perfectly."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4))
    decision = decide(build_tspaces(build_pair_operators(spec, Side.A)))
    assert decision.frame is not None
    proto = build_protocol(spec, decision.frame, Side.A)
    model = ProtocolModel.model_validate_json(ProtocolModel.from_protocol(proto).model_dump_json())
    realised = model.realise()
    assert np.array_equal(realised.alice.vectors, proto.alice.vectors)
    assert simulate(spec, realised, 1000, seed=0).perfect


def test_analysis_report() -> None:
    """Test the report records the input digest and reads back unchanged."""
    document = bell_state_set([(0, 0), (0, 1), (1, 0)], 2).to_json().encode()
    report = analyze(document, AnalysisSettingsModel())
    assert len(report.input_digest) == 64
    assert (report.d_a, report.d_b, report.d, report.n) == (2, 2, 2, 3)
    assert analysis_exit_code(report) == ExitCode.REFUTED
    side = report.side_report(Side.B)
    assert side is not None
    assert side.verdict.reason == "tperp_too_small"
    text = dump_json(report)
    assert text.endswith("\n")
    assert dump_json(AnalysisReportModel.model_validate_json(text)) == text


def test_analysis_pads_rectangular_input() -> None:
    """Test a rectangular state set is padded before analysis."""
    vectors = np.eye(6, dtype=complex)[[0, 4]]  # |0>|0> and |1>|1> with d_A = 2, d_B = 3
    document = StateSet(2, 3, tuple(vectors)).to_json().encode()
    report = analyze(document, AnalysisSettingsModel(side="A"))
    assert (report.d_a, report.d_b, report.d) == (2, 3, 3)
    assert report.sides[0].verdict.tag == "distinguishable_projective"


@pytest.mark.parametrize(
    ("value", "text"),
    [
        (0.1, "0.10000000000000001"),
        (1.0, "1.0"),
        (1e-10, "1.0000000000000000e-10"),
        (0.75, "0.75"),
    ],
)
def test_format_float(value: float, text: str) -> None:
    """Test floats are written with 17 significant digits and read back exactly."""
    assert format_float(value) == text
    assert float(text) == value


def test_dump_json_writes_17_digit_floats() -> None:
    """Test the settings tolerance in a report is written with 17 significant digits."""
    document = bell_state_set([(0, 0), (0, 1)], 2).to_json().encode()
    report = analyze(document, AnalysisSettingsModel(side="A"))
    text = dump_json(report)
    assert '"tol": 1.0000000000000000e-10' in text
    assert '"dim_tperp": 3' in text
