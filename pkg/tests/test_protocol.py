#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# mypy: disable-error-code="misc"
"""Unit tests for building, verifying and simulating one-way protocols."""

import numpy as np
import pytest

from locc_oneway.exceptions import ConventionError, OPViolation
from locc_oneway.hermspace import EigenFrame
from locc_oneway.mas import Verdict, decide
from locc_oneway.protocol import (
    BobMeasurement,
    Protocol,
    alice_from_frame,
    bob_measurements,
    build_protocol,
    simulate,
    vector_feasible,
    verify_op,
)
from locc_oneway.states import (
    EXAMPLE_ONE_INDICES,
    EXAMPLE_TWO_INDICES,
    Side,
    SpectralStateSet,
    StateSet,
    bell_state_set,
    haar_state_set,
    spectral_decompose,
)
from locc_oneway.tspace import build_pair_operators, build_tspaces

ALL_QUBIT_BELL = ((0, 0), (0, 1), (1, 0), (1, 1))
# Common eigenbasis of W02 and W21 +- W23, as columns
EXAMPLE_TWO_FRAME = (
    np.array([[1, 1j, 1, 1j], [1, -1j, 1, -1j], [1, 1, -1, -1], [1, -1, -1, 1]]).T / 2
)
TWISTED = np.exp(1j * np.pi / 4)


def decided_protocol(spec: SpectralStateSet, side: Side = Side.A) -> Protocol:
    """Decide a state set and build the protocol for its frame."""
    decision = decide(build_tspaces(build_pair_operators(spec, side)))
    assert decision.verdict is Verdict.DISTINGUISHABLE_PROJECTIVE
    assert decision.frame is not None
    return build_protocol(spec, decision.frame, side)


def twisted_state_set() -> SpectralStateSet:
    """Get two states told apart only by Alice measuring (|0> +- e^{i pi/4} |1>) / sqrt(2)."""
    plus = np.array([1, TWISTED]) / np.sqrt(2)
    minus = np.array([1, -TWISTED]) / np.sqrt(2)
    zero = np.array([1, 0])
    return spectral_decompose(StateSet(2, 2, (np.kron(plus, zero), np.kron(minus, zero))))


def test_alice_from_frame_conjugates() -> None:
    """Test the measurement vectors are the conjugated frame vectors."""
    frame = EigenFrame(np.array([[1, 1], [1j, -1j]]) / np.sqrt(2))
    alice = alice_from_frame(frame)
    assert np.allclose(alice.vectors, np.array([[1, -1j], [1, 1j]]) / np.sqrt(2))
    assert alice.completeness_residual <= 1e-12
    assert np.allclose(alice.projectors().sum(axis=0), np.eye(2))


def test_vector_feasible() -> None:
    """Test feasibility of frame vectors against the pair operators."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4))
    ops = build_pair_operators(spec, Side.A)
    feasible, violation = vector_feasible(np.array([1, 0, 1, 0]) / np.sqrt(2), ops)
    assert feasible
    assert violation <= 1e-12
    feasible, _ = vector_feasible(np.array([1, 0, 0, 0], dtype=complex), ops)
    assert not feasible


def test_vector_feasible_without_pairs() -> None:
    """Test every vector is feasible for a single state."""
    ops = build_pair_operators(spectral_decompose(bell_state_set([(0, 0)], 2)), Side.A)
    assert vector_feasible(np.array([0.6, 0.8j]), ops) == (True, 0.0)


def test_vector_feasible_full_bell_basis() -> None:
    """Test no unit vector is feasible for the full qubit Bell basis."""
    ops = build_pair_operators(spectral_decompose(bell_state_set(ALL_QUBIT_BELL, 2)), Side.A)
    rng = np.random.default_rng(3)
    for _ in range(10):
        vector = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert not vector_feasible(vector / np.linalg.norm(vector), ops)[0]


def test_verify_op_example_one() -> None:
    """Test the known measurement for the first Bell example preserves orthogonality."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4))
    frame = EigenFrame(
        np.array([[1, 0, 1, 0], [1, 0, -1, 0], [0, 1, 0, 1], [0, 1, 0, -1]]).T / np.sqrt(2)
    )
    assert verify_op(spec, alice_from_frame(frame)) <= 1e-12


def test_verify_op_standard_basis_on_bell_basis() -> None:
    """Test the standard basis breaks orthogonality of the qubit Bell basis by 1/2."""
    spec = spectral_decompose(bell_state_set(ALL_QUBIT_BELL, 2))
    alice = alice_from_frame(EigenFrame(np.eye(2)))
    assert verify_op(spec, alice) == pytest.approx(0.5)
    with pytest.raises(OPViolation) as info:
        bob_measurements(spec, alice)
    assert info.value.violation == pytest.approx(0.5)


def test_verify_op_matches_vector_feasibility() -> None:
    """Test a measurement preserves orthogonality exactly when its frame is feasible."""
    spec = twisted_state_set()
    ops = build_pair_operators(spec, Side.A)
    for vectors in (
        np.array([[1, 1], [TWISTED.conjugate(), -TWISTED.conjugate()]]) / np.sqrt(2),
        np.array([[1, 1], [TWISTED, -TWISTED]]) / np.sqrt(2),
        np.eye(2),
    ):
        frame = EigenFrame(vectors)
        feasible = all(vector_feasible(vector, ops)[0] for vector in frame)
        assert (verify_op(spec, alice_from_frame(frame)) <= 1e-10) is feasible


def test_bob_measurements_two_bell_states() -> None:
    """Test Bob reads off |0> or |1> after Alice measures the standard basis."""
    spec = spectral_decompose(bell_state_set([(0, 0), (0, 1)], 2))
    proto = bob_measurements(spec, alice_from_frame(EigenFrame(np.eye(2))))
    assert proto.op_violation <= 1e-12
    first = proto.bob[0]
    assert first.reachable == (True, True)
    assert np.allclose(np.abs(first.blocks[0]), [[1, 0]])
    assert np.allclose(np.abs(first.blocks[1]), [[0, 1]])
    assert first.remainder.shape == (0, 2)


def test_bob_measurements_example_one() -> None:
    """Test every outcome leaves four one-dimensional blocks."""
    proto = decided_protocol(spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4)))
    assert len(proto.bob) == 4
    for measurement in proto.bob:
        assert [len(block) for block in measurement.blocks] == [1, 1, 1, 1]
        assert np.allclose(measurement.projectors().sum(axis=0), np.eye(4))


def test_bob_measurements_mixed_blocks() -> None:
    """Test mixed states give blocks of the rank of their residuals."""
    spec = spectral_decompose(StateSet(2, 2, (np.diag([0.6, 0.4, 0, 0]).astype(complex),)))
    proto = bob_measurements(spec, alice_from_frame(EigenFrame(np.eye(2))))
    assert [len(block) for block in proto.bob[0].blocks] == [2]
    assert [len(block) for block in proto.bob[1].blocks] == [0]
    assert proto.bob[1].reachable == (False,)


def test_build_protocol_detects_convention_slip() -> None:
    """Test a frame that only works unconjugated is flagged."""
    spec = twisted_state_set()
    plus = np.array([1, TWISTED]) / np.sqrt(2)
    minus = np.array([1, -TWISTED]) / np.sqrt(2)
    with pytest.raises(ConventionError):
        build_protocol(spec, EigenFrame(np.column_stack([plus, minus])), Side.A)
    proto = build_protocol(spec, EigenFrame(np.column_stack([plus, minus]).conj()), Side.A)
    assert proto.op_violation <= 1e-12


def test_build_protocol_rejects_bad_frame() -> None:
    """Test a frame failing both ways is a plain violation."""
    spec = spectral_decompose(bell_state_set(ALL_QUBIT_BELL, 2))
    with pytest.raises(OPViolation):
        build_protocol(spec, EigenFrame(np.eye(2)), Side.A)


def test_decided_protocol_for_twisted_states() -> None:
    """Test the decided frame is measured through its conjugate."""
    spec = twisted_state_set()
    proto = decided_protocol(spec)
    assert verify_op(spec, proto.alice) <= 1e-10
    assert simulate(spec, proto, 2000, seed=1).perfect


@pytest.mark.parametrize(
    ("indices", "d"),
    [(EXAMPLE_ONE_INDICES, 4), (((0, 0), (0, 1)), 2), (((2, 1),), 3)],
)
def test_simulation_is_perfect(indices: tuple[tuple[int, int], ...], d: int) -> None:
    """Test decided protocols identify every drawn state."""
    spec = spectral_decompose(bell_state_set(indices, d))
    proto = decided_protocol(spec)
    statistics = simulate(spec, proto, 10_000, seed=42)
    assert statistics.successes == 10_000
    assert statistics.perfect
    assert sum(statistics.state_trials) == 10_000
    assert statistics.success_rate.nominal_value == 1.0
    assert statistics.success_rate.std_dev == 0.0


def test_example_two_frame_protocol() -> None:
    """Test the second Bell example is distinguished by measuring the eigenbasis of its MAS."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_TWO_INDICES, 4))
    proto = build_protocol(spec, EigenFrame(EXAMPLE_TWO_FRAME), Side.A)
    assert proto.op_violation <= 1e-10
    statistics = simulate(spec, proto, 10_000, seed=42)
    assert statistics.successes == 10_000


def test_simulation_side_b() -> None:
    """Test a protocol initiated by B also succeeds."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4))
    proto = decided_protocol(spec, Side.B)
    assert proto.side is Side.B
    assert simulate(spec, proto, 5000, seed=7).perfect


def test_simulation_detects_corrupted_blocks() -> None:
    """Test swapping Bob's blocks makes the protocol fail."""
    spec = spectral_decompose(bell_state_set(EXAMPLE_ONE_INDICES, 4))
    proto = decided_protocol(spec)
    corrupted = Protocol(
        proto.alice,
        tuple(
            BobMeasurement((*measurement.blocks[1:], measurement.blocks[0]), measurement.remainder)
            for measurement in proto.bob
        ),
        proto.op_violation,
    )
    statistics = simulate(spec, corrupted, 10_000, seed=42)
    assert statistics.successes < 10_000
    assert not statistics.perfect


def test_simulation_without_trials() -> None:
    """Test no trials succeed vacuously."""
    spec = spectral_decompose(bell_state_set([(0, 0)], 2))
    statistics = simulate(spec, decided_protocol(spec), 0)
    assert statistics.perfect
    assert statistics.success_rate.nominal_value == 1.0


def test_simulation_is_independent_of_workers() -> None:
    """Test sharding the trials does not change the tallies."""
    first = np.diag([0.7, 0.3, 0, 0]).astype(complex)
    second = np.diag([0, 0, 0.6, 0.4]).astype(complex)
    spec = spectral_decompose(StateSet(2, 2, (first, second)))
    proto = decided_protocol(spec)
    single = simulate(spec, proto, 3000, seed=11, workers=1)
    sharded = simulate(spec, proto, 3000, seed=11, workers=4)
    assert single == sharded
    assert single.perfect


def test_simulation_rejects_negative_trials() -> None:
    """Test a negative trial count is refused."""
    spec = spectral_decompose(bell_state_set([(0, 0)], 2))
    with pytest.raises(ValueError, match="trials"):
        simulate(spec, decided_protocol(spec), -1)


@pytest.mark.integration()
def test_random_pairs_are_soundly_distinguished() -> None:
    """Test random pairs of states at d = 3 are always distinguished in simulation."""
    for seed in range(20):
        spec = spectral_decompose(haar_state_set(3, 2, np.random.default_rng(seed)))
        proto = decided_protocol(spec)
        assert verify_op(spec, proto.alice) <= 1e-10
        assert simulate(spec, proto, 10_000, seed=seed).perfect
