#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
One-way measurement protocols: construction, verification and simulation.

The initiating party ("Alice", whichever physical party that is) measures in
the complex conjugate of a MAS eigenframe, announces the outcome, and the
other party ("Bob") measures in the orthogonal blocks spanned by each state's
residual.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import null_space

from locc_oneway.exceptions import ConventionError, OPViolation
from locc_oneway.hermspace import DEFAULT_TOL, FRAME_TOL, EigenFrame
from locc_oneway.states import Side, SpectralStateSet
from locc_oneway.tspace import PairOperators
from locc_oneway.uncertainties import UFloat, binomial_rate

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 10_000

# (Alice outcome, (state, eigenvector), (state', eigenvector'))
ViolationTriple = tuple[int, tuple[int, int], tuple[int, int]]


@dataclass(frozen=True, eq=False)
class AliceMeasurement:
    """The rank-one measurement of the initiating party, one vector per row."""

    side: Side
    vectors: NDArray[np.complex128]
    completeness_residual: float

    @property
    def outcomes(self) -> int:
        """Get the number of outcomes m."""
        return int(self.vectors.shape[0])

    def projectors(self) -> NDArray[np.complex128]:
        """Get the rank-one POVM elements |k><k|."""
        return np.einsum("ki,kj->kij", self.vectors, self.vectors.conj())


@dataclass(frozen=True, eq=False)
class BobMeasurement:
    """The responding party's blocks for one outcome of the initiating party."""

    blocks: tuple[NDArray[np.complex128], ...]
    remainder: NDArray[np.complex128]

    @property
    def reachable(self) -> tuple[bool, ...]:
        """Get whether each state can produce this outcome."""
        return tuple(len(block) > 0 for block in self.blocks)

    def projectors(self) -> NDArray[np.complex128]:
        """Get one projector per state followed by the remainder projector."""
        return np.array(
            [block.T @ block.conj() for block in (*self.blocks, self.remainder)],
            dtype=np.complex128,
        )


@dataclass(frozen=True, eq=False)
class Protocol:
    """A complete one-way protocol and its orthogonality certificate."""

    alice: AliceMeasurement
    bob: tuple[BobMeasurement, ...]
    op_violation: float

    @property
    def side(self) -> Side:
        """Get the initiating party."""
        return self.alice.side


@dataclass(frozen=True)
class SimulationStatistics:
    """The tallies of a Monte-Carlo run of a protocol."""

    trials: int
    seed: int
    successes: int
    state_trials: tuple[int, ...]
    state_successes: tuple[int, ...]
    outcome_counts: tuple[int, ...]
    success_rate: UFloat = field(compare=False)

    @property
    def perfect(self) -> bool:
        """Check whether every trial identified its state."""
        return self.successes == self.trials


def alice_from_frame(frame: EigenFrame, side: Side = Side.A) -> AliceMeasurement:
    """Get the initiating party's measurement from a MAS eigenframe, by conjugation."""
    vectors = frame.vectors.T.conj()
    completeness = np.einsum("ki,kj->ij", vectors, vectors.conj())
    residual = float(np.linalg.norm(completeness - np.eye(frame.dim)))
    return AliceMeasurement(side, np.ascontiguousarray(vectors), residual)


def vector_feasible(
    v: NDArray[np.complex128], ops: PairOperators, tol: float = DEFAULT_TOL
) -> tuple[bool, float]:
    """Check <v|W|v> vanishes for every pair operator, returning the worst value."""
    if len(ops) == 0:
        return True, 0.0
    values = np.einsum("i,nij,j->n", v.conj(), ops.operators, v)
    violation = float(np.max(np.abs(values)))
    return violation <= tol, violation


def _local_operator(projector: NDArray[np.complex128], side: Side) -> NDArray[np.complex128]:
    """Get P (x) 1 when the initiator is A, or 1 (x) P when it is B."""
    identity = np.eye(len(projector), dtype=np.complex128)
    return np.kron(projector, identity) if side is Side.A else np.kron(identity, projector)


def _worst_violation(
    spec: SpectralStateSet, vectors: NDArray[np.complex128], side: Side
) -> tuple[float, ViolationTriple | None]:
    """Get the largest |<psi_ij|(P_k (x) 1)|psi_i'j'>| over outcomes and cross-state pairs."""
    labels = [(i, j) for i in range(spec.n) for j in range(spec.ranks[i])]
    if spec.n < 2:  # noqa: PLR2004
        return 0.0, None
    eigenvectors = np.vstack([spec.eigenvectors(i) for i in range(spec.n)])
    owners = np.array([i for i, _ in labels])
    cross = owners[:, np.newaxis] < owners[np.newaxis, :]

    worst: tuple[float, ViolationTriple | None] = (0.0, None)
    for outcome, vector in enumerate(vectors):
        operator = _local_operator(np.outer(vector, vector.conj()), side)
        overlaps = np.abs(eigenvectors.conj() @ operator @ eigenvectors.T) * cross
        row, column = np.unravel_index(np.argmax(overlaps), overlaps.shape)
        if overlaps[row, column] > worst[0]:
            worst = (float(overlaps[row, column]), (outcome, labels[row], labels[column]))
    return worst


def verify_op(spec: SpectralStateSet, alice: AliceMeasurement, tol: float = DEFAULT_TOL) -> float:
    """Get the largest violation of orthogonality preservation by a measurement."""
    violation, triple = _worst_violation(spec, alice.vectors, alice.side)
    if violation > tol:
        logger.debug("Measurement violates orthogonality by %.3g at %s", violation, triple)
    return violation


def _span_rows(vectors: NDArray[np.complex128], tol: float) -> NDArray[np.complex128]:
    """Get an orthonormal basis of the span of some vectors, as rows."""
    if len(vectors) == 0:
        return np.zeros((0, vectors.shape[-1]), dtype=np.complex128)
    left, singular_values, _ = np.linalg.svd(vectors.T, full_matrices=False)
    return np.ascontiguousarray(left[:, singular_values > tol].T)


def residual_vectors(
    spec: SpectralStateSet, alice: AliceMeasurement
) -> list[list[NDArray[np.complex128]]]:
    """
    Get Bob's unnormalised residuals W conj(a_k) for every outcome and state.

    The result is indexed [outcome][state] and each entry holds one row per
    eigenvector of the state.
    """
    matrices = spec.party_matrices(alice.side)
    return [
        [np.einsum("jab,b->ja", matrices[i], vector.conj()) for i in range(spec.n)]
        for vector in alice.vectors
    ]


def bob_measurements(
    spec: SpectralStateSet, alice: AliceMeasurement, tol: float = DEFAULT_TOL
) -> Protocol:
    """
    Build the responding party's measurement for every outcome of a measurement.

    Raises:
        OPViolation: If the measurement does not preserve orthogonality, or if
            the residual blocks of two states overlap.
    """
    violation, triple = _worst_violation(spec, alice.vectors, alice.side)
    if violation > tol and triple is not None:
        raise OPViolation(triple, violation)

    bob: list[BobMeasurement] = []
    for outcome, residuals in enumerate(residual_vectors(spec, alice)):
        blocks = tuple(_span_rows(rows, tol) for rows in residuals)
        stacked = np.vstack(blocks)
        overlap = np.abs(stacked.conj() @ stacked.T - np.eye(len(stacked)))
        if len(stacked) > 0 and float(np.max(overlap)) > FRAME_TOL:
            raise OPViolation((outcome,), float(np.max(overlap)))
        remainder = (
            null_space(stacked.conj()).T if len(stacked) > 0 else np.eye(spec.dim, dtype=np.complex128)
        )
        bob.append(BobMeasurement(blocks, np.asarray(remainder, dtype=np.complex128)))
        logger.debug(
            "Outcome %d reaches states %s",
            outcome,
            [i for i, block in enumerate(blocks) if len(block) > 0],
        )
    return Protocol(alice, tuple(bob), violation)


def build_protocol(
    spec: SpectralStateSet, frame: EigenFrame, side: Side, tol: float = DEFAULT_TOL
) -> Protocol:
    """
    Build and verify the protocol measuring in the conjugate of a frame.

    Raises:
        ConventionError: If the conjugated measurement fails verification while
            the unconjugated one passes, which signals inconsistent bookkeeping.
        OPViolation: If the measurement fails verification either way.
    """
    alice = alice_from_frame(frame, side)
    violation, triple = _worst_violation(spec, alice.vectors, side)
    if violation > tol:
        unconjugated, _ = _worst_violation(spec, frame.vectors.T, side)
        if unconjugated <= tol:
            raise ConventionError(
                f"Frame passes unconjugated ({unconjugated:.3g}) but fails conjugated "
                f"({violation:.3g}) on side {side.value}!"
            )
        raise OPViolation(triple or (), violation)
    return bob_measurements(spec, alice, tol)


@dataclass(frozen=True, eq=False)
class _SamplingTables:
    """The cumulative Born-rule distributions of a protocol on a state set."""

    eigenvalues: tuple[NDArray[np.float64], ...]
    alice: tuple[NDArray[np.float64], ...]
    bob: tuple[NDArray[np.float64], ...]

    @classmethod
    def build(cls, spec: SpectralStateSet, proto: Protocol) -> "_SamplingTables":
        """Tabulate cumulative distributions indexed by state, then eigenvector, then outcome."""
        residuals = residual_vectors(spec, proto.alice)
        projectors = [measurement.projectors() for measurement in proto.bob]
        alice_tables = []
        bob_tables = []
        for i in range(spec.n):
            # [outcome, eigenvector, d]
            rows = np.array([residuals[k][i] for k in range(proto.alice.outcomes)])
            weights = np.sum(np.abs(rows) ** 2, axis=-1)
            alice_tables.append(np.cumsum(weights / weights.sum(axis=0), axis=0).T)
            # [outcome, eigenvector, block]
            blocks = np.array(
                [
                    np.real(np.einsum("ja,pab,jb->jp", rows[k].conj(), projectors[k], rows[k]))
                    for k in range(proto.alice.outcomes)
                ]
            )
            totals = np.maximum(blocks.sum(axis=-1, keepdims=True), np.finfo(float).tiny)
            bob_tables.append(np.cumsum(blocks / totals, axis=-1).transpose(1, 0, 2))
        return cls(
            tuple(np.cumsum(values / values.sum()) for values in spec.eigenvalues),
            tuple(alice_tables),
            tuple(bob_tables),
        )


def _run_trials(
    tables: _SamplingTables, uniforms: NDArray[np.float64], states: int, outcomes: int
) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.int64]]:
    """Run the trials for one shard of pre-drawn uniforms."""
    state_trials = np.zeros(states, dtype=np.int64)
    state_successes = np.zeros(states, dtype=np.int64)
    outcome_counts = np.zeros(outcomes, dtype=np.int64)
    for draw in uniforms:
        state = min(int(draw[0] * states), states - 1)
        weights = tables.eigenvalues[state]
        eigenvector = min(int(np.searchsorted(weights, draw[1], side="right")), len(weights) - 1)
        alice = tables.alice[state][eigenvector]
        outcome = min(int(np.searchsorted(alice, draw[2], side="right")), outcomes - 1)
        bob = tables.bob[state][eigenvector][outcome]
        block = min(int(np.searchsorted(bob, draw[3], side="right")), len(bob) - 1)
        state_trials[state] += 1
        state_successes[state] += int(block == state)
        outcome_counts[outcome] += 1
    return state_trials, state_successes, outcome_counts


def simulate(
    spec: SpectralStateSet,
    proto: Protocol,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    *,
    workers: int = 1,
) -> SimulationStatistics:
    """
    Run a protocol on uniformly drawn states and tally its success.

    Every trial draws a state uniformly, one of its eigenvectors by weight,
    the initiator's outcome by the Born rule and then the responder's block by
    the Born rule; it succeeds when the block belongs to the drawn state. All
    uniforms come from one seeded PCG64 stream before sharding, so the tallies
    do not depend on the number of workers.

    Args:
        spec: The state set the protocol was built for.
        proto: The protocol to run.
        trials: The number of trials.
        seed: The seed of the uniform stream.
        workers: The number of threads to shard the trials across.

    Returns:
        The tallies, with the success rate and its binomial standard error.
    """
    if trials < 0:
        raise ValueError(f"Cannot run {trials} trials!")
    states, outcomes = spec.n, proto.alice.outcomes
    uniforms = np.random.default_rng(seed).random((trials, 4))
    tables = _SamplingTables.build(spec, proto)

    shards = np.array_split(uniforms, max(1, workers))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(
            executor.map(lambda shard: _run_trials(tables, shard, states, outcomes), shards)
        )
    state_trials = sum((result[0] for result in results), np.zeros(states, dtype=np.int64))
    state_successes = sum((result[1] for result in results), np.zeros(states, dtype=np.int64))
    outcome_counts = sum((result[2] for result in results), np.zeros(outcomes, dtype=np.int64))

    successes = int(state_successes.sum())
    logger.info("Simulated %d trials with %d successes", trials, successes)
    return SimulationStatistics(
        trials,
        seed,
        successes,
        tuple(int(value) for value in state_trials),
        tuple(int(value) for value in state_successes),
        tuple(int(value) for value in outcome_counts),
        binomial_rate(successes, trials),
    )
