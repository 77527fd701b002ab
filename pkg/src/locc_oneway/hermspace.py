#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Real linear algebra over the space of d x d hermitian matrices.

Hermitian matrices are identified with real d^2-tuples through a fixed
orthonormal (Hilbert-Schmidt) basis of generalised Gell-Mann matrices, so that
spans, complements and ranks reduce to real SVDs.
"""

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import null_space
from typing_extensions import Self

from locc_oneway.exceptions import (
    DegenerateFailure,
    DimensionMismatchError,
    NonCommutingInput,
    NotHermitianError,
)

logger = logging.getLogger(__name__)

HermMatrix = NDArray[np.complex128]

DEFAULT_TOL = 1e-10
HERM_TOL = 1e-12
FRAME_TOL = 1e-8
DEFAULT_RETRIES = 8


def check_hermitian(matrix: NDArray[np.complexfloating], tol: float = HERM_TOL) -> HermMatrix:
    """Validate a square matrix is hermitian and return it as a complex array."""
    entries = np.asarray(matrix, dtype=np.complex128)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:  # noqa: PLR2004
        raise DimensionMismatchError(f"Expected a square matrix, got shape {entries.shape}!")
    deviation = float(np.max(np.abs(entries - entries.conj().T), initial=0.0))
    if deviation > tol:
        raise NotHermitianError(f"Matrix deviates from hermitian by {deviation:.3g}!")
    return entries


@lru_cache(maxsize=32)
def gell_mann_basis(dim: int) -> NDArray[np.complex128]:
    """
    Get the orthonormal generalised Gell-Mann basis of the d x d hermitians.

    The result has shape (d^2, d, d) and satisfies Tr(G_a G_b) = delta_ab. The
    identity (scaled to unit norm) is the last element.
    """
    basis = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    for index, (j, k) in enumerate(product(range(dim), repeat=2)):
        if j > k:
            basis[index, j, k] = basis[index, k, j] = 1 / np.sqrt(2)
        elif k > j:
            basis[index, j, k] = -1j / np.sqrt(2)
            basis[index, k, j] = 1j / np.sqrt(2)
        elif j < dim - 1:
            diagonal = np.zeros(dim)
            diagonal[: j + 1] = 1.0
            diagonal[j + 1] = -(j + 1)
            basis[index] = np.diag(diagonal) / np.sqrt((j + 1) * (j + 2))
        else:
            basis[index] = np.eye(dim) / np.sqrt(dim)
    basis.setflags(write=False)
    return basis


def vectorize(matrices: NDArray[np.complexfloating]) -> NDArray[np.float64]:
    """Get the real Gell-Mann coordinates of one matrix or a stack of matrices."""
    matrices = np.asarray(matrices, dtype=np.complex128)
    basis = gell_mann_basis(matrices.shape[-1])
    return np.einsum("aij,...ji->...a", basis, matrices).real


def unvectorize(coordinates: NDArray[np.floating], dim: int) -> NDArray[np.complex128]:
    """Get the hermitian matrices with the given real Gell-Mann coordinates."""
    return np.einsum("...a,aij->...ij", np.asarray(coordinates, dtype=np.float64), gell_mann_basis(dim))


def hs_inner(x: HermMatrix, y: HermMatrix) -> float:
    """Get the Hilbert-Schmidt inner product Tr(xy) of two hermitian matrices."""
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Cannot pair matrices of shapes {x.shape} and {y.shape}!")
    return float(np.einsum("ij,ji->", x, y).real)


def commutator(x: NDArray[np.complexfloating], y: NDArray[np.complexfloating]) -> NDArray[np.complex128]:
    """Get the commutator [x, y] = xy - yx."""
    return np.asarray(x @ y - y @ x, dtype=np.complex128)


def offdiagonal_norm(matrix: NDArray[np.complexfloating]) -> float:
    """Get the Hilbert-Schmidt norm of the off-diagonal part of a matrix."""
    return float(np.linalg.norm(matrix - np.diag(np.diag(matrix))))


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """An orthonormal basis of a real subspace of the d x d hermitian matrices."""

    dim_ambient: int
    elements: NDArray[np.complex128]
    tol: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        """Normalise the element stack to shape (count, d, d)."""
        elements = np.asarray(self.elements, dtype=np.complex128).reshape(
            -1, self.dim_ambient, self.dim_ambient
        )
        object.__setattr__(self, "elements", elements)

    @classmethod
    def from_orthonormal(
        cls, elements: Sequence[HermMatrix] | NDArray[np.complex128], tol: float = DEFAULT_TOL
    ) -> Self:
        """Wrap matrices already known to be orthonormal, checking the claim."""
        stack = np.array([check_hermitian(element) for element in elements], dtype=np.complex128)
        dim = stack.shape[-1]
        gram = vectorize(stack) @ vectorize(stack).T
        deviation = float(np.max(np.abs(gram - np.eye(len(stack))), initial=0.0))
        if deviation > 10 * tol:
            raise ValueError(f"Elements are not orthonormal (Gram deviation {deviation:.3g})!")
        return cls(dim, stack, tol)

    @property
    def count(self) -> int:
        """Get the dimension of the subspace."""
        return int(self.elements.shape[0])

    @property
    def coordinates(self) -> NDArray[np.float64]:
        """Get the elements as rows of real Gell-Mann coordinates."""
        return vectorize(self.elements)

    def __len__(self) -> int:
        """Get the dimension of the subspace."""
        return self.count

    def __iter__(self) -> Iterator[HermMatrix]:
        """Iterate over the basis elements."""
        return iter(self.elements)

    def __getitem__(self, index: int) -> HermMatrix:
        """Get a basis element."""
        return self.elements[index]


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """An orthonormal basis of C^d, stored as the columns of a unitary."""

    vectors: NDArray[np.complex128]

    def __post_init__(self) -> None:
        """Check the frame is unitary."""
        vectors = np.asarray(self.vectors, dtype=np.complex128)
        deviation = np.linalg.norm(vectors.conj().T @ vectors - np.eye(vectors.shape[1]))
        if vectors.shape[0] != vectors.shape[1] or deviation > FRAME_TOL:
            raise ValueError(f"Frame is not unitary (deviation {deviation:.3g})!")
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        """Get the dimension of the underlying space."""
        return int(self.vectors.shape[0])

    def __iter__(self) -> Iterator[NDArray[np.complex128]]:
        """Iterate over the frame vectors."""
        return iter(self.vectors.T)

    def projectors(self) -> NDArray[np.complex128]:
        """Get the rank-one projectors onto the frame vectors."""
        return np.einsum("ik,jk->kij", self.vectors, self.vectors.conj())


def orthonormalize(
    generators: Sequence[HermMatrix] | NDArray[np.complex128],
    tol: float = DEFAULT_TOL,
    *,
    dim: int | None = None,
    atol: float = 0.0,
) -> SubspaceBasis:
    """
    Get an orthonormal basis of the real span of a set of hermitian matrices.

    The rank is the number of singular values of the stacked coordinates above
    `tol` times the largest one (and above `atol`, if given).
    """
    if len(generators) == 0:
        if dim is None:
            raise ValueError("The ambient dimension is needed to span no generators!")
        return SubspaceBasis(dim, np.zeros((0, dim, dim), dtype=np.complex128), tol)
    stack = np.array([check_hermitian(generator) for generator in generators], dtype=np.complex128)
    if dim is not None and stack.shape[-1] != dim:
        raise DimensionMismatchError(f"Expected {dim} x {dim} generators, got {stack.shape[1:]}!")
    dim = stack.shape[-1]

    _, singular_values, right = np.linalg.svd(vectorize(stack), full_matrices=False)
    cutoff = max(tol * singular_values[0], atol)
    rank = int(np.sum(singular_values > cutoff)) if singular_values[0] > 0 else 0
    return SubspaceBasis(dim, unvectorize(right[:rank], dim), tol)


def complement(sub: SubspaceBasis) -> SubspaceBasis:
    """Get an orthonormal basis of the orthogonal complement of a subspace."""
    dim = sub.dim_ambient
    if sub.count == 0:
        return SubspaceBasis(dim, gell_mann_basis(dim).copy(), sub.tol)
    kernel = null_space(sub.coordinates)
    return SubspaceBasis(dim, unvectorize(kernel.T, dim), sub.tol)


def project(sub: SubspaceBasis, matrix: HermMatrix) -> HermMatrix:
    """Get the orthogonal projection of a hermitian matrix onto a subspace."""
    if sub.count == 0:
        return np.zeros_like(matrix, dtype=np.complex128)
    return unvectorize(sub.coordinates.T @ (sub.coordinates @ vectorize(matrix)), sub.dim_ambient)


def residual(sub: SubspaceBasis, matrix: HermMatrix) -> float:
    """Get the distance of a hermitian matrix from a subspace."""
    return float(np.linalg.norm(matrix - project(sub, matrix)))


def spans_equal(first: SubspaceBasis, second: SubspaceBasis, tol: float = DEFAULT_TOL) -> bool:
    """Check whether two orthonormal bases span the same subspace."""
    if first.count != second.count or first.dim_ambient != second.dim_ambient:
        return False
    return all(residual(second, element) <= tol for element in first) and all(
        residual(first, element) <= tol for element in second
    )


def commutator_space(basis: SubspaceBasis, tol: float | None = None) -> SubspaceBasis:
    """Get an orthonormal basis of the span of i[T_j, T_k] over basis pairs."""
    tol = basis.tol if tol is None else tol
    generators = [1j * commutator(first, second) for first, second in combinations(basis, 2)]
    return orthonormalize(generators, tol, dim=basis.dim_ambient, atol=tol)


def is_abelian(basis: SubspaceBasis, tol: float = DEFAULT_TOL) -> bool:
    """Check whether all the basis elements commute pairwise."""
    return all(
        np.linalg.norm(commutator(first, second)) <= tol
        for first, second in combinations(basis, 2)
    )


def simultaneous_diagonalize(
    basis: SubspaceBasis,
    tol: float = DEFAULT_TOL,
    retries: int = DEFAULT_RETRIES,
    seed: int = 0,
) -> EigenFrame:
    """
    Find a common eigenbasis of a commuting family of hermitian matrices.

    A random real combination of the family is diagonalised; a generic
    combination has simple spectrum on the joint eigenspaces, so its
    eigenvectors diagonalise every member. Unlucky draws are resampled.

    Args:
        basis: An abelian subspace to diagonalise.
        tol: The tolerance on commutators and on residual off-diagonal norms.
        retries: The number of extra combinations to try after the first.
        seed: The seed of the coefficient generator.

    Returns:
        A unitary frame in which every basis element is diagonal.
    """
    if not is_abelian(basis, tol):
        raise NonCommutingInput("Cannot simultaneously diagonalise a non-abelian family!")
    dim = basis.dim_ambient
    if basis.count == 0:
        return EigenFrame(np.eye(dim, dtype=np.complex128))

    rng = np.random.default_rng(seed)
    for attempt in range(retries + 1):
        coefficients = rng.standard_normal(basis.count)
        combination = np.einsum("k,kij->ij", coefficients, basis.elements)
        _, vectors = np.linalg.eigh(combination)
        worst = max(offdiagonal_norm(vectors.conj().T @ element @ vectors) for element in basis)
        if worst <= tol:
            logger.debug("Simultaneous diagonalisation succeeded on attempt %d", attempt + 1)
            return EigenFrame(vectors)
        logger.debug("Random combination %d left off-diagonal norm %.3g", attempt + 1, worst)
    raise DegenerateFailure(
        f"No random combination diagonalised the family after {retries + 1} attempts!"
    )
