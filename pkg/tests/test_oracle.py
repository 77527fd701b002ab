#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# mypy: disable-error-code="misc"
"""Tests for the randomised frame search and the genericity sampler."""

import numpy as np
import pytest

from locc_oneway.mas import Verdict, decide
from locc_oneway.oracle import genericity_sample, random_feasible_frame_search
from locc_oneway.protocol import build_protocol, vector_feasible
from locc_oneway.states import (
    EXAMPLE_ONE_INDICES,
    TIGHT_BELL_INDICES,
    Side,
    bell_state_set,
    spectral_decompose,
)
from locc_oneway.tspace import build_pair_operators, build_tspaces


def test_frame_search_without_pairs() -> None:
    """Test the standard basis is returned when nothing constrains the frame."""
    ops = build_pair_operators(spectral_decompose(bell_state_set([(0, 0)], 3)), Side.A)
    frame = random_feasible_frame_search(ops, attempts=1)
    assert frame is not None
    assert np.allclose(frame.vectors, np.eye(3))


def test_frame_search_two_bell_states() -> None:
    """Test the search finds a verified frame for two qubit Bell states."""
    spec = spectral_decompose(bell_state_set([(0, 0), (0, 1)], 2))
    ops = build_pair_operators(spec, Side.A)
    frame = random_feasible_frame_search(ops, attempts=16, seed=2)
    assert frame is not None
    assert all(vector_feasible(vector, ops)[0] for vector in frame)
    assert build_protocol(spec, frame, Side.A).op_violation <= 1e-10


def test_frame_search_full_bell_basis() -> None:
    """Test the search finds nothing for the full qubit Bell basis."""
    spec = spectral_decompose(bell_state_set([(0, 0), (0, 1), (1, 0), (1, 1)], 2))
    ops = build_pair_operators(spec, Side.A)
    assert random_feasible_frame_search(ops, attempts=8) is None


@pytest.mark.integration()
@pytest.mark.parametrize(
    ("indices", "d"),
    [
        (EXAMPLE_ONE_INDICES, 4),
        (TIGHT_BELL_INDICES, 4),
        (((0, 0), (0, 1)), 2),
        (((1, 2),), 3),
        (((0, 0), (0, 1), (1, 0)), 2),
        (((0, 0), (0, 1), (1, 0), (1, 1)), 2),
    ],
)
def test_frame_search_agrees_with_decision(indices: tuple[tuple[int, int], ...], d: int) -> None:
    """Test the search succeeds exactly where the decision procedure finds a MAS."""
    spec = spectral_decompose(bell_state_set(indices, d))
    ops = build_pair_operators(spec, Side.A)
    decision = decide(build_tspaces(ops))
    frame = random_feasible_frame_search(ops, seed=1)
    assert decision.verdict is not Verdict.INCONCLUSIVE
    assert (frame is not None) is (decision.verdict is Verdict.DISTINGUISHABLE_PROJECTIVE)
    if frame is not None:
        assert build_protocol(spec, frame, Side.A).op_violation <= 1e-10


@pytest.mark.parametrize(
    ("d", "n", "histogram"),
    [(2, 1, {4: 10}), (2, 4, {1: 10}), (3, 2, {7: 10})],
)
def test_genericity_small(d: int, n: int, histogram: dict[int, int]) -> None:
    """Test dim T-perp is constant over random families of small size."""
    report = genericity_sample(d, n, 10, seed=0)
    assert report.dim_histogram == histogram
    assert report.det_diagnostics is None


@pytest.mark.integration()
@pytest.mark.parametrize(("d", "n", "samples"), [(3, 3, 200), (4, 4, 50)])
def test_genericity_dimension_is_d(d: int, n: int, samples: int) -> None:
    """Test n = d random states generically leave dim T-perp = d."""
    report = genericity_sample(d, n, samples, seed=0, workers=4)
    assert report.dim_histogram == {d: samples}


def test_genericity_is_reproducible() -> None:
    """Test the histogram and diagnostics depend only on the seed."""
    first = genericity_sample(3, 3, 12, seed=5, det=True, workers=1)
    second = genericity_sample(3, 3, 12, seed=5, det=True, workers=3)
    assert first == second
    assert first.det_diagnostics is not None
    assert len(first.det_diagnostics) == 12


@pytest.mark.parametrize(("d", "n", "samples"), [(2, 5, 1), (2, 0, 1), (0, 1, 1), (2, 2, 0)])
def test_genericity_rejects_bad_parameters(d: int, n: int, samples: int) -> None:
    """Test impossible sampler parameters are refused."""
    with pytest.raises(ValueError, match="Need"):
        genericity_sample(d, n, samples, seed=0)
