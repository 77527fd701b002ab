#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Bipartite state sets: ingestion, validation, padding and spectral data.

Pure states are complex vectors of length d_A * d_B whose component
`a * d_B + b` is the amplitude of |s_a>_A |s_b>_B. Mixed states are density
matrices in the same product basis.
"""

import logging
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Annotated, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError
from typing_extensions import Self

from locc_oneway.exceptions import (
    DegenerateEigenbasisWarning,
    DimensionMismatchError,
    NormalizationError,
    NotHermitianError,
    OrthogonalityError,
    SchemaError,
)
from locc_oneway.hermspace import DEFAULT_TOL, check_hermitian

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-8

EXAMPLE_ONE_INDICES: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (3, 3))
EXAMPLE_TWO_INDICES: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 2), (3, 0))
# Four Bell states at d = 4 with dim T-perp = d + 1
TIGHT_BELL_INDICES: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (2, 2))

State = NDArray[np.complex128]


class Side(Enum):
    """The party which initiates a one-way protocol."""

    A = "A"
    B = "B"


ComplexPair = tuple[float, float]


class PureStateModel(BaseModel):
    """A Pydantic model for a pure state given by its amplitudes."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["pure"]
    vector: list[ComplexPair]


class MixedStateModel(BaseModel):
    """A Pydantic model for a mixed state given by its density matrix."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["mixed"]
    matrix: list[list[ComplexPair]]


StateModel = Annotated[PureStateModel | MixedStateModel, Field(discriminator="type")]


class StateSetModel(BaseModel):
    """A Pydantic model for the state set JSON document."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    d_a: PositiveInt = Field(alias="dA")
    d_b: PositiveInt = Field(alias="dB")
    states: list[StateModel] = Field(min_length=1)

    @classmethod
    def from_state_set(cls, state_set: "StateSet") -> Self:
        """Construct the document model of a state set."""
        states: list[PureStateModel | MixedStateModel] = []
        for state in state_set.states:
            if state.ndim == 1:
                states.append(PureStateModel(type="pure", vector=complex_to_pairs(state)))
            else:
                states.append(
                    MixedStateModel(type="mixed", matrix=[complex_to_pairs(row) for row in state])
                )
        return cls(d_a=state_set.d_a, d_b=state_set.d_b, states=states)


def complex_to_pairs(values: NDArray[np.complex128]) -> list[ComplexPair]:
    """Split complex values into [re, im] pairs."""
    return [(float(value.real), float(value.imag)) for value in values]


def pairs_to_complex(pairs: Sequence[ComplexPair] | Sequence[Sequence[ComplexPair]]) -> State:
    """Join [re, im] pairs (at any nesting depth) into complex values."""
    array = np.asarray(pairs, dtype=np.float64)
    return np.asarray(array[..., 0] + 1j * array[..., 1], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class StateSet:
    """An ordered set of pure (vector) or mixed (matrix) bipartite states."""

    d_a: int
    d_b: int
    states: tuple[State, ...]

    @property
    def n(self) -> int:
        """Get the number of states in the set."""
        return len(self.states)

    @property
    def is_square(self) -> bool:
        """Check whether both parties have the same dimension."""
        return self.d_a == self.d_b

    def to_json(self) -> str:
        """Serialise the state set to the input JSON schema."""
        return StateSetModel.from_state_set(self).model_dump_json(by_alias=True, indent=2)


def density_matrix(state: State) -> NDArray[np.complex128]:
    """Get the density matrix of a pure or mixed state."""
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def _check_normalization(index: int, state: State, dim: int, tol: float) -> None:
    """Validate the shape, norm, hermiticity and positivity of a state."""
    if not np.all(np.isfinite(state)):
        raise NormalizationError(f"State {index} has amplitudes which are not finite!")
    if state.ndim == 1:
        if state.shape != (dim,):
            raise SchemaError(f"State {index} has {state.shape[0]} amplitudes, expected {dim}!")
        norm = float(np.linalg.norm(state))
        if abs(norm - 1) > tol:
            raise NormalizationError(f"State {index} has norm {norm:.12g}, expected 1!")
        return

    if state.shape != (dim, dim):
        raise SchemaError(f"State {index} has shape {state.shape}, expected {(dim, dim)}!")
    try:
        check_hermitian(state)
    except NotHermitianError as error:
        raise NormalizationError(f"Density matrix {index} is not hermitian!") from error
    smallest = float(np.linalg.eigvalsh(state)[0])
    if smallest < -tol:
        raise NormalizationError(
            f"Density matrix {index} has negative eigenvalue {smallest:.3g}!"
        )
    trace = float(np.trace(state).real)
    if abs(trace - 1) > tol:
        raise NormalizationError(f"Density matrix {index} has trace {trace:.12g}, expected 1!")


def validate_state_set(state_set: StateSet, tol: float = DEFAULT_TOL) -> StateSet:
    """
    Check every state is normalised and every pair of states is orthogonal.

    Pairs are orthogonal when Tr(rho_i rho_i') <= tol; the worst offending pair
    is reported with overlap sqrt(Tr(rho_i rho_i')), which is |<psi|phi>| for
    pure states.
    """
    dim = state_set.d_a * state_set.d_b
    for index, state in enumerate(state_set.states):
        _check_normalization(index, state, dim, tol)

    worst: tuple[tuple[int, int], float] | None = None
    for (i, first), (j, second) in combinations(enumerate(state_set.states), 2):
        if first.ndim == 1 and second.ndim == 1:
            value = abs(np.vdot(first, second)) ** 2
        else:
            value = float(np.trace(density_matrix(first) @ density_matrix(second)).real)
        if value > tol and (worst is None or value > worst[1]):
            worst = ((i, j), value)
    if worst is not None:
        raise OrthogonalityError(worst[0], float(np.sqrt(worst[1])))
    return state_set


def load_state_set(document: str | bytes, tol: float = DEFAULT_TOL) -> StateSet:
    """Parse and validate a state set from its JSON document."""
    try:
        model = StateSetModel.model_validate_json(document)
    except ValidationError as error:
        raise SchemaError(str(error)) from error
    try:
        states = tuple(
            pairs_to_complex(state.vector if isinstance(state, PureStateModel) else state.matrix)
            for state in model.states
        )
    except (ValueError, IndexError) as error:
        raise SchemaError(f"State amplitudes are not a rectangular array: {error}") from error
    logger.debug("Loaded %d states with d_A=%d, d_B=%d", len(states), model.d_a, model.d_b)
    return validate_state_set(StateSet(model.d_a, model.d_b, states), tol)


def pad_to_square(state_set: StateSet) -> StateSet:
    """Embed the smaller party into dimension max(d_A, d_B) by zero padding."""
    if state_set.is_square:
        return state_set
    dim = max(state_set.d_a, state_set.d_b)
    d_a, d_b = state_set.d_a, state_set.d_b

    padded: list[State] = []
    for state in state_set.states:
        if state.ndim == 1:
            amplitudes = np.zeros((dim, dim), dtype=np.complex128)
            amplitudes[:d_a, :d_b] = state.reshape(d_a, d_b)
            padded.append(amplitudes.reshape(-1))
        else:
            matrix = np.zeros((dim, dim, dim, dim), dtype=np.complex128)
            matrix[:d_a, :d_b, :d_a, :d_b] = state.reshape(d_a, d_b, d_a, d_b)
            padded.append(matrix.reshape(dim * dim, dim * dim))
    return StateSet(dim, dim, tuple(padded))


@dataclass(frozen=True, eq=False)
class SpectralStateSet:
    """
    The spectral data of a square state set.

    For state i, `eigenvalues[i]` holds the non-zero eigenvalues lambda_ij and
    `coefficient_matrices[i]` the matching d x d matrices W_ij, with
    (W_ij)_kl the amplitude of |s_l>_A |s_k>_B: Bob indexes rows, Alice columns.
    """

    dim: int
    eigenvalues: tuple[NDArray[np.float64], ...]
    coefficient_matrices: tuple[NDArray[np.complex128], ...]

    @property
    def n(self) -> int:
        """Get the number of states."""
        return len(self.eigenvalues)

    @property
    def ranks(self) -> tuple[int, ...]:
        """Get the rank r_i of each state."""
        return tuple(len(values) for values in self.eigenvalues)

    def party_matrices(self, side: Side) -> tuple[NDArray[np.complex128], ...]:
        """
        Get the coefficient matrices with the given party indexing the columns.

        Side A uses W_ij as is; side B uses the transposes, which are the
        coefficient matrices of the party-swapped states.
        """
        if side is Side.A:
            return self.coefficient_matrices
        return tuple(matrices.transpose(0, 2, 1) for matrices in self.coefficient_matrices)

    def eigenvectors(self, index: int) -> NDArray[np.complex128]:
        """Get the eigenvectors |psi_ij> of a state as rows."""
        matrices = self.coefficient_matrices[index]
        return matrices.transpose(0, 2, 1).reshape(len(matrices), -1)

    def density_matrix(self, index: int) -> NDArray[np.complex128]:
        """Reconstruct the density matrix of a state from its spectral data."""
        vectors = self.eigenvectors(index)
        return np.einsum("j,ja,jb->ab", self.eigenvalues[index], vectors, vectors.conj())


def spectral_decompose(state_set: StateSet, tol: float = DEFAULT_TOL) -> SpectralStateSet:
    """Get the eigenvalues and coefficient matrices of every state."""
    if not state_set.is_square:
        raise DimensionMismatchError("Pad the state set to a square system first!")
    dim = state_set.d_a

    all_eigenvalues: list[NDArray[np.float64]] = []
    all_matrices: list[NDArray[np.complex128]] = []
    for index, state in enumerate(state_set.states):
        if state.ndim == 1:
            eigenvalues = np.ones(1)
            vectors = (state / np.linalg.norm(state))[np.newaxis, :]
        else:
            values, columns = np.linalg.eigh(state)
            if values[0] < -tol:
                raise NormalizationError(
                    f"Density matrix {index} has negative eigenvalue {values[0]:.3g}!"
                )
            keep = np.flatnonzero(values > tol)[::-1]
            eigenvalues = values[keep]
            vectors = columns[:, keep].T
            if np.any(np.abs(np.diff(eigenvalues)) <= DEGENERACY_TOL):
                warnings.warn(
                    f"State {index} has a repeated eigenvalue; the chosen eigenbasis is"
                    " one of many.",
                    DegenerateEigenbasisWarning,
                    stacklevel=2,
                )
        all_eigenvalues.append(np.asarray(eigenvalues, dtype=np.float64))
        all_matrices.append(vectors.reshape(-1, dim, dim).transpose(0, 2, 1))
    return SpectralStateSet(dim, tuple(all_eigenvalues), tuple(all_matrices))


def gen_bell(n_idx: int, m_idx: int, d: int) -> State:
    """
    Get the generalised Bell state psi_nm in C^d x C^d.

    The coefficient matrix is (W_nm)_kj = exp(2 pi i j n / d) / sqrt(d) when
    k = j + m (mod d), and zero otherwise.
    """
    if not (0 <= n_idx < d and 0 <= m_idx < d):
        raise ValueError(f"Bell indices ({n_idx}, {m_idx}) out of range for d={d}!")
    vector = np.zeros(d * d, dtype=np.complex128)
    for j in range(d):
        vector[j * d + (j + m_idx) % d] = np.exp(2j * np.pi * j * n_idx / d) / np.sqrt(d)
    return vector


def bell_state_set(indices: Iterable[tuple[int, int]], d: int) -> StateSet:
    """Get the set of generalised Bell states with the given (n, m) indices."""
    return StateSet(d, d, tuple(gen_bell(n_idx, m_idx, d) for n_idx, m_idx in indices))


def product_state_family(d: int) -> StateSet:
    """Get the product states |s_i>_A |0>_B, whose T-perp is the diagonals."""
    states = []
    for i in range(d):
        vector = np.zeros(d * d, dtype=np.complex128)
        vector[i * d] = 1.0
        states.append(vector)
    return StateSet(d, d, tuple(states))


def haar_orthonormal(dim: int, count: int, rng: np.random.Generator) -> NDArray[np.complex128]:
    """Get `count` Haar-random orthonormal vectors in C^dim, as columns."""
    ginibre = (rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diagonal = np.diag(r)
    phases = np.where(np.abs(diagonal) > 0, diagonal / np.abs(diagonal), 1.0)
    return np.asarray(q * phases.conj(), dtype=np.complex128)


def haar_state_set(d: int, n: int, rng: np.random.Generator) -> StateSet:
    """Get n Haar-random orthonormal pure states of a d x d system."""
    if n > d * d:
        raise ValueError(f"Cannot fit {n} orthogonal states in dimension {d * d}!")
    columns = haar_orthonormal(d * d, n, rng)
    return StateSet(d, d, tuple(columns.T.copy()))


def random_mixed_state_set(d: int, n: int, rank: int, rng: np.random.Generator) -> StateSet:
    """Get n random mixed states of the given rank with mutually orthogonal supports."""
    if n * rank > d * d:
        raise ValueError(f"Cannot fit {n} rank-{rank} orthogonal states in dimension {d * d}!")
    columns = haar_orthonormal(d * d, n * rank, rng)
    states = []
    for i in range(n):
        support = columns[:, i * rank : (i + 1) * rank]
        weights = rng.dirichlet(np.ones(rank))
        states.append(np.asarray((support * weights) @ support.conj().T, dtype=np.complex128))
    return StateSet(d, d, tuple(states))
