#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""The exceptions and warnings raised by the one-way LOCC tool."""

from typing import Any


class LoccError(Exception):
    """The base class for all errors raised by the tool."""


class StateSetError(LoccError):
    """An input state set is malformed or physically invalid."""


class SchemaError(StateSetError):
    """A state set document does not conform to the input schema."""


class NormalizationError(StateSetError):
    """A state is not normalised, or a density matrix is not positive."""


class OrthogonalityError(StateSetError):
    """Two states of a set are not orthogonal."""

    def __init__(self, pair: tuple[int, int], overlap: float) -> None:
        """Record the worst offending pair and its overlap."""
        self.pair = pair
        self.overlap = overlap
        super().__init__(
            f"States {pair[0]} and {pair[1]} are not orthogonal "
            f"(overlap {overlap:.6g})!"
        )


class LinearAlgebraError(LoccError):
    """A matrix or subspace argument violates an operation's precondition."""


class DimensionMismatchError(LinearAlgebraError):
    """Two matrices or subspaces live in different ambient dimensions."""


class NotHermitianError(LinearAlgebraError):
    """A matrix expected to be hermitian is not."""


class NonCommutingInput(LinearAlgebraError):  # noqa: N818
    """A family of matrices expected to commute does not."""


class DegenerateFailure(LinearAlgebraError):  # noqa: N818
    """Every random combination failed to simultaneously diagonalise a family."""


class NonTraceless(LinearAlgebraError):  # noqa: N818
    """A matrix expected to be traceless is not."""


class RankAmbiguity(LinearAlgebraError):  # noqa: N818
    """A singular value lies too close to a rank cutoff to decide the rank."""

    def __init__(self, singular_values: list[float], cutoff: float) -> None:
        """Record the offending singular values and the cutoff."""
        self.singular_values = singular_values
        self.cutoff = cutoff
        super().__init__(
            f"Singular values {singular_values} are too close to the rank "
            f"cutoff {cutoff:.3g} to decide the rank!"
        )


class InternalConsistencyError(LoccError):
    """A pipeline self-check failed; indicates a bug or a numerical breakdown."""


class ProtocolError(LoccError):
    """A measurement protocol cannot be built or is invalid."""


class OPViolation(ProtocolError):  # noqa: N818
    """A measurement does not preserve the orthogonality of the states."""

    def __init__(self, triple: tuple[Any, ...], violation: float) -> None:
        """Record the offending (outcome, pair) triple and its magnitude."""
        self.triple = triple
        self.violation = violation
        super().__init__(
            f"Measurement is not orthogonality preserving at {triple} "
            f"(violation {violation:.6g})!"
        )


class ConventionError(ProtocolError):
    """A frame only works without the conjugation step, so bookkeeping is off."""


class DegenerateEigenbasisWarning(UserWarning):
    """A mixed state has a repeated eigenvalue, so its eigenbasis is a choice."""
