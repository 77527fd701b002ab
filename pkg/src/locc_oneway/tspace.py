#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
The pair operators of a state set and the subspaces they span.

For the initiating party, every ordered choice of two eigenvectors from two
different states gives a traceless operator W; its hermitian and
antihermitian parts span T, and the complement T-perp holds every first
measurement that keeps the states orthogonal.
"""

import logging
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
from numpy.typing import NDArray

from locc_oneway.exceptions import InternalConsistencyError
from locc_oneway.hermspace import (
    DEFAULT_TOL,
    SubspaceBasis,
    complement,
    orthonormalize,
    residual,
)
from locc_oneway.states import Side, SpectralStateSet

logger = logging.getLogger(__name__)

PairIndex = tuple[int, int, int, int]


@dataclass(frozen=True, eq=False)
class PairOperators:
    """The operators W, with hermitian parts H and antihermitian parts A, for each pair index."""

    side: Side
    dim: int
    index_set: tuple[PairIndex, ...]
    operators: NDArray[np.complex128]

    @property
    def hermitian_parts(self) -> NDArray[np.complex128]:
        """Get H = (W + W^dagger) / 2 for every pair index."""
        return (self.operators + self.operators.conj().transpose(0, 2, 1)) / 2

    @property
    def antihermitian_parts(self) -> NDArray[np.complex128]:
        """Get A = (W - W^dagger) / 2i for every pair index."""
        return (self.operators - self.operators.conj().transpose(0, 2, 1)) / 2j

    def __len__(self) -> int:
        """Get the cardinality of the index set."""
        return len(self.index_set)


@dataclass(frozen=True, eq=False)
class TSpaces:
    """The subspace T and its complement for one initiating party."""

    side: Side
    t: SubspaceBasis
    tperp: SubspaceBasis

    @property
    def dim(self) -> int:
        """Get the local dimension d."""
        return self.t.dim_ambient

    @property
    def dims(self) -> tuple[int, int]:
        """Get (dim T, dim T-perp)."""
        return (self.t.count, self.tperp.count)


def build_pair_operators(spec: SpectralStateSet, side: Side) -> PairOperators:
    """
    Get the pair operators of a state set for the given initiating party.

    The index set holds (i, i', j, j') for states i < i' and eigenvectors j of
    state i and j' of state i'. For side A the operator is W_ij^dagger W_i'j';
    side B uses the same formula on the party-swapped coefficient matrices,
    which is the complex conjugate of W_ij W_i'j'^dagger.
    """
    matrices = spec.party_matrices(side)
    index_set: list[PairIndex] = []
    operators: list[NDArray[np.complex128]] = []
    for first, second in combinations(range(spec.n), 2):
        for j, k in product(range(spec.ranks[first]), range(spec.ranks[second])):
            index_set.append((first, second, j, k))
            operators.append(matrices[first][j].conj().T @ matrices[second][k])

    stack = (
        np.array(operators, dtype=np.complex128)
        if operators
        else np.zeros((0, spec.dim, spec.dim), dtype=np.complex128)
    )
    logger.debug("Side %s has %d pair operators", side.value, len(index_set))
    return PairOperators(side, spec.dim, tuple(index_set), stack)


def build_tspaces(ops: PairOperators, tol: float = DEFAULT_TOL) -> TSpaces:
    """
    Get T as the span of every H and A, and T-perp as its complement.

    Raises:
        InternalConsistencyError: If the identity does not lie in T-perp, which
            can only happen when the pair operators are not traceless.
    """
    generators = np.concatenate([ops.hermitian_parts, ops.antihermitian_parts])
    t = orthonormalize(generators, tol, dim=ops.dim, atol=tol)
    tperp = complement(t)

    identity_residual = residual(tperp, np.eye(ops.dim, dtype=np.complex128))
    if identity_residual > tol * ops.dim:
        raise InternalConsistencyError(
            f"The identity is {identity_residual:.3g} away from T-perp on side {ops.side.value}!"
        )
    logger.info(
        "Side %s: dim T = %d, dim T-perp = %d", ops.side.value, t.count, tperp.count
    )
    return TSpaces(ops.side, t, tperp)
