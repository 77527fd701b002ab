#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Decide whether T-perp contains a maximally abelian subspace (MAS).

A MAS inside T-perp is exactly a projective one-way protocol: its common
eigenbasis is the initiating party's measurement. The decision is a case
analysis on the dimension of T-perp, with constructive branches wherever a
MAS provably exists.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import null_space, svdvals
from scipy.optimize import bisect

from locc_oneway.exceptions import (
    InternalConsistencyError,
    NonTraceless,
    RankAmbiguity,
)
from locc_oneway.hermspace import (
    DEFAULT_RETRIES,
    DEFAULT_TOL,
    FRAME_TOL,
    EigenFrame,
    HermMatrix,
    SubspaceBasis,
    check_hermitian,
    commutator_space,
    is_abelian,
    orthonormalize,
    residual,
    simultaneous_diagonalize,
)
from locc_oneway.states import Side
from locc_oneway.tspace import TSpaces

logger = logging.getLogger(__name__)

RANK_GAP_FACTOR = 100.0
BISECT_XTOL = 1e-15
DIAGONAL_RESIDUAL_TOL = 1e-12


class Verdict(Enum):
    """The closed set of outcomes of the decision procedure."""

    DISTINGUISHABLE_PROJECTIVE = "distinguishable_projective"
    NOT_DISTINGUISHABLE = "not_distinguishable"
    NO_PROJECTIVE_PROTOCOL = "no_projective_protocol"
    INCONCLUSIVE = "inconclusive"

    @property
    def is_refutation(self) -> bool:
        """Check whether the verdict rules out a projective protocol."""
        return self in {Verdict.NOT_DISTINGUISHABLE, Verdict.NO_PROJECTIVE_PROTOCOL}


class Reason(Enum):
    """The branch of the decision procedure which produced a verdict."""

    TPERP_TOO_SMALL = "tperp_too_small"
    TPERP_NOT_ABELIAN = "tperp_not_abelian"
    TPERP_IS_MAS = "tperp_is_mas"
    SMALL_T_ALWAYS_CONTAINS_MAS = "small_t_always_contains_mas"
    GAMMA_RANK_TEST_PASSED = "gamma_rank_test_passed"
    GAMMA_RANK_TEST_FAILED = "gamma_rank_test_failed"
    COMMUTATOR_DIMENSION_EXCEEDS_BOUND = "commutator_dimension_exceeds_bound"
    RANK_AMBIGUITY = "rank_ambiguity"
    UNDECIDED_DIMENSION_REGION = "undecided_dimension_region"
    ORACLE_SEARCH_FOUND_FRAME = "oracle_search_found_frame"


@dataclass(frozen=True, eq=False)
class MasDecision:
    """The verdict for one initiating party, with the MAS and frame when found."""

    side: Side
    dim_tperp: int
    verdict: Verdict
    reason: Reason
    mas: SubspaceBasis | None = None
    frame: EigenFrame | None = None
    evidence: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CommutatorEvidence:
    """The quantities compared by the commutator-dimension refutation."""

    t: int
    bound: float
    dim_commutator: int | None
    threshold: float

    @property
    def within_bound(self) -> bool:
        """Check whether t is small enough for the refutation to apply."""
        return 1 <= self.t <= self.bound

    @property
    def refutes(self) -> bool:
        """Check whether the commutator space is too large to allow a MAS."""
        return (
            self.within_bound
            and self.dim_commutator is not None
            and self.dim_commutator > self.threshold
        )

    def as_dict(self) -> dict[str, Any]:
        """Get the evidence as a JSON-compatible record."""
        return {
            "t": self.t,
            "t_bound": self.bound,
            "dim_commutator": self.dim_commutator,
            "threshold": self.threshold,
        }


@dataclass(frozen=True, eq=False)
class GammaAnalysis:
    """The Gamma/Omega matrices built from a (d+1)-dimensional T-perp."""

    t: int
    commutator: SubspaceBasis
    gamma: NDArray[np.float64]
    omega: NDArray[np.float64]
    omega_ranks: tuple[int, ...]
    support_intersection: NDArray[np.float64]

    @property
    def dim_commutator(self) -> int:
        """Get the dimension of the commutator space."""
        return self.commutator.count


@dataclass(frozen=True, eq=False)
class GammaDecision:
    """The outcome of the rank test: a MAS and frame, or neither."""

    analysis: GammaAnalysis
    mas: SubspaceBasis | None = None
    frame: EigenFrame | None = None


def commutator_bound(dim: int) -> float:
    """Get the largest t for which the commutator-dimension refutation applies."""
    return float(np.sqrt(3 * dim**2 - 3 * dim + 0.25) - (dim - 1.5))


def commutator_threshold(t: int, dim: int) -> float:
    """Get the most commutator dimensions a T-perp of dimension d + t containing a MAS allows."""
    return t * dim + t * (t - 3) / 2


def commutator_evidence(tperp: SubspaceBasis, tol: float = DEFAULT_TOL) -> CommutatorEvidence:
    """Measure the commutator space of T-perp, when t is within the bound."""
    dim = tperp.dim_ambient
    t = tperp.count - dim
    bound = commutator_bound(dim)
    evidence = CommutatorEvidence(t, bound, None, commutator_threshold(t, dim))
    if not evidence.within_bound:
        return evidence
    return CommutatorEvidence(t, bound, commutator_space(tperp, tol).count, evidence.threshold)


def commutator_bound_refute(
    tperp: SubspaceBasis, tol: float = DEFAULT_TOL
) -> CommutatorEvidence | None:
    """
    Refute a MAS in T-perp when its commutator space is too large.

    A T-perp of dimension d + t containing a MAS has at most
    td + t(t - 3) / 2 independent commutators; this is only informative for
    t up to sqrt(3d^2 - 3d + 1/4) - (d - 3/2).

    Returns:
        The evidence when the refutation fires, otherwise None.
    """
    evidence = commutator_evidence(tperp, tol)
    logger.debug("Commutator refutation evidence: %s", evidence)
    return evidence if evidence.refutes else None


def _fix_sign(vector: NDArray[np.float64], tol: float) -> NDArray[np.float64]:
    """Flip a real vector so its first non-negligible component is positive."""
    leading = vector[np.flatnonzero(np.abs(vector) > tol)]
    if len(leading) > 0 and leading[0] < 0:
        return -vector
    return vector


def _numerical_rank(matrix: NDArray[np.float64], tol: float) -> int:
    """Get the rank of a matrix, refusing to guess near the cutoff."""
    singular_values = svdvals(matrix)
    if singular_values[0] == 0:
        return 0
    cutoff = max(tol * singular_values[0], tol)
    ambiguous = (singular_values > cutoff / RANK_GAP_FACTOR) & (
        singular_values <= cutoff * RANK_GAP_FACTOR
    )
    if np.any(ambiguous):
        raise RankAmbiguity([float(value) for value in singular_values], cutoff)
    return int(np.sum(singular_values > cutoff))


def gamma_matrices(tperp: SubspaceBasis, commutator: SubspaceBasis) -> NDArray[np.float64]:
    """Get the real antisymmetric matrices (Gamma_j)_kl = i Tr(G_j [T_k, T_l])."""
    elements = tperp.elements
    products = np.einsum("kab,lbc->klac", elements, elements)
    commutators = products - products.transpose(1, 0, 2, 3)
    return np.asarray(
        (1j * np.einsum("jab,klba->jkl", commutator.elements, commutators)).real,
        dtype=np.float64,
    )


def _assemble_mas(
    tperp: SubspaceBasis, omega: NDArray[np.float64], axis: NDArray[np.float64], tol: float
) -> SubspaceBasis:
    """Rotate the T-perp basis so that all but its last element span a MAS."""
    partners = np.array([_fix_sign(matrix @ axis, tol) for matrix in omega])
    partners -= np.outer(partners @ axis, axis)
    q, _ = np.linalg.qr(partners.T)
    partners = np.array([_fix_sign(column, tol) for column in q.T])

    known = np.vstack([partners, axis])
    completion = null_space(known).T if len(known) < len(axis) else np.zeros((0, len(axis)))
    rotation = np.vstack([partners, completion, axis])
    rotated = np.einsum("kl,lab->kab", rotation[:-1], tperp.elements)
    return SubspaceBasis(tperp.dim_ambient, rotated, tperp.tol)


def gamma_rank_decide(
    tperp: SubspaceBasis,
    tol: float = DEFAULT_TOL,
    *,
    retries: int = DEFAULT_RETRIES,
    seed: int = 0,
) -> GammaDecision:
    """
    Decide whether a (d+1)-dimensional T-perp contains a MAS.

    A MAS exists exactly when every element of an orthonormal basis {Omega_j}
    of span{Gamma_j} has rank two and their supports meet in a single line. The
    line e spans the direction of T-perp outside the MAS; rotating the basis so
    that e is its last element leaves the MAS spanned by the remaining d.

    Raises:
        RankAmbiguity: If a singular value of some Omega_j is too close to the
            rank cutoff to tell whether it is zero.
    """
    dim = tperp.dim_ambient
    if tperp.count != dim + 1:
        raise ValueError(f"Expected a T-perp of dimension {dim + 1}, got {tperp.count}!")
    commutator = commutator_space(tperp, tol)
    size = tperp.count

    if commutator.count == 0:
        logger.debug("T-perp is abelian, so any spectral subspace is a MAS")
        frame = simultaneous_diagonalize(tperp, tol, retries, seed)
        analysis = GammaAnalysis(
            1,
            commutator,
            np.zeros((0, size, size)),
            np.zeros((0, size, size)),
            (),
            np.zeros((0, size)),
        )
        mas = orthonormalize(frame.projectors(), tol)
        return GammaDecision(analysis, mas, frame)

    gamma = gamma_matrices(tperp, commutator)
    asymmetry = float(np.max(np.abs(gamma + gamma.transpose(0, 2, 1))))
    if asymmetry > tol * size:
        raise InternalConsistencyError(f"Gamma matrices deviate from antisymmetric by {asymmetry:.3g}!")

    _, singular_values, right = np.linalg.svd(gamma.reshape(len(gamma), -1), full_matrices=False)
    count = int(np.sum(singular_values > max(tol * singular_values[0], tol)))
    omega = right[:count].reshape(count, size, size)
    omega_ranks = tuple(_numerical_rank(matrix, tol) for matrix in omega)

    kernels = [null_space(matrix, rcond=tol) for matrix in omega]
    kernel_sum = np.hstack(kernels).T if kernels else np.zeros((0, size))
    support_intersection = (
        null_space(kernel_sum, rcond=tol).T if len(kernel_sum) > 0 else np.eye(size)
    )
    analysis = GammaAnalysis(1, commutator, gamma, omega, omega_ranks, support_intersection)
    logger.debug(
        "dim C = %d, Omega ranks %s, support intersection of dimension %d",
        commutator.count,
        omega_ranks,
        len(support_intersection),
    )

    # A lone Omega has a 2-dimensional support, any line of which leaves an abelian complement
    single_line = len(support_intersection) == 1 or (
        len(omega) == 1 and len(support_intersection) == 2  # noqa: PLR2004
    )
    if any(rank != 2 for rank in omega_ranks) or not single_line:  # noqa: PLR2004
        return GammaDecision(analysis)

    axis = _fix_sign(support_intersection[0], tol)
    mas = _assemble_mas(tperp, omega, axis, tol)
    if not is_abelian(mas, tol * size):
        raise InternalConsistencyError("The rotated T-perp basis does not span an abelian subspace!")
    frame = simultaneous_diagonalize(mas, tol * size, retries, seed)
    return GammaDecision(analysis, mas, frame)


def _check_traceless(matrix: HermMatrix, tol: float) -> None:
    """Validate a hermitian matrix is traceless."""
    trace = abs(np.trace(matrix))
    if trace > tol * max(1.0, float(np.linalg.norm(matrix))):
        raise NonTraceless(f"Matrix has trace {trace:.3g}, expected zero!")


def _embed(block: NDArray[np.complex128], size: int, start: int) -> NDArray[np.complex128]:
    """Embed a square block into the identity of the given size."""
    unitary = np.eye(size, dtype=np.complex128)
    stop = start + len(block)
    unitary[start:stop, start:stop] = block
    return unitary


def _zero_upper_block(
    h: NDArray[np.complex128], a: NDArray[np.complex128], tol: float
) -> NDArray[np.complex128]:
    """Zero the trace-removed diagonals of the upper (m-1) x (m-1) blocks."""
    size = len(h)
    upper_h = h[:-1, :-1] - np.trace(h[:-1, :-1]) / (size - 1) * np.eye(size - 1)
    upper_a = a[:-1, :-1] - np.trace(a[:-1, :-1]) / (size - 1) * np.eye(size - 1)
    return _embed(_zero_diagonals(upper_h, upper_a, tol), size, 0)


def _zero_diagonals(
    h: NDArray[np.complex128], a: NDArray[np.complex128], tol: float
) -> NDArray[np.complex128]:
    """Find U zeroing the diagonals of U^dagger h U and U^dagger a U, for traceless h and a."""
    size = len(h)
    if size == 1:
        return np.eye(1, dtype=np.complex128)

    # After this step both diagonals are multiples of diag(1, ..., 1, -(m-1))
    first = _zero_upper_block(h, a, tol)
    h1 = first.conj().T @ h @ first
    a1 = first.conj().T @ a @ first
    shape = np.ones(size)
    shape[-1] = -(size - 1)
    shape /= np.sqrt((size - 1) * size)
    alpha = float(np.diag(h1).real @ shape)
    beta = float(np.diag(a1).real @ shape)
    radius = float(np.hypot(alpha, beta))
    scale = max(float(np.linalg.norm(h1)), float(np.linalg.norm(a1)))
    if radius <= tol * scale:
        return first

    h2 = (alpha * h1 + beta * a1) * np.sqrt((size - 1) * size) / radius**2
    a2 = (-beta * h1 + alpha * a1) / radius

    phi = -float(np.angle(a2[-2, -1]))
    phase = np.exp(-1j * (np.pi + 2 * phi) / 4)
    phases = _embed(np.diag([phase, phase.conjugate()]), size, size - 2)
    h3 = phases.conj().T @ h2 @ phases
    a3 = phases.conj().T @ a2 @ phases

    lower = float(size - 1)
    coupling = float(h3[-2, -1].real)
    theta = bisect(
        lambda angle: (1 - lower) / 2 - (1 + lower) / 2 * np.cos(angle) - coupling * np.sin(angle),
        0.0,
        np.pi,
        xtol=BISECT_XTOL,
    )
    cos, sin = np.cos(theta / 2), np.sin(theta / 2)
    rotation = _embed(np.array([[cos, -sin], [sin, cos]], dtype=np.complex128), size, size - 2)
    h4 = rotation.conj().T @ h3 @ rotation
    a4 = rotation.conj().T @ a3 @ rotation

    last = _zero_upper_block(h4, a4, tol)
    return first @ phases @ rotation @ last


def zero_diagonal_pair(h: HermMatrix, a: HermMatrix, tol: float = DEFAULT_TOL) -> NDArray[np.complex128]:
    """
    Find a unitary U making the diagonals of U^dagger H U and U^dagger A U vanish.

    The construction is inductive on the dimension m. Zeroing the upper
    (m-1) x (m-1) blocks leaves both diagonals along diag(1, ..., 1, -(m-1)); a
    real mixing of H and A removes that component from A, a phase rotation makes
    the lower 2 x 2 block of A proportional to sigma_y, and a real rotation of
    the last two coordinates (found by bisection) moves all the remaining
    diagonal weight of H into the upper block, where induction finishes it.

    Args:
        h: A traceless hermitian matrix.
        a: A traceless hermitian matrix of the same dimension.
        tol: The tolerance on the input traces.

    Returns:
        The unitary U.

    Raises:
        NonTraceless: If either input has a non-zero trace.
    """
    h = check_hermitian(h)
    a = check_hermitian(a)
    if h.shape != a.shape:
        raise ValueError(f"Cannot pair matrices of shapes {h.shape} and {a.shape}!")
    _check_traceless(h, tol)
    _check_traceless(a, tol)
    unitary = _zero_diagonals(h, a, tol)

    scale = max(1.0, float(np.linalg.norm(h)), float(np.linalg.norm(a)))
    diagonal_residual = max(
        float(np.max(np.abs(np.diag(unitary.conj().T @ matrix @ unitary)), initial=0.0))
        for matrix in (h, a)
    )
    logger.debug("Zeroed the diagonals of a traceless pair with residual %.3g", diagonal_residual)
    if diagonal_residual > DIAGONAL_RESIDUAL_TOL * scale:
        logger.warning(
            "Rotated diagonals are %.3g away from zero, above %.0e",
            diagonal_residual,
            DIAGONAL_RESIDUAL_TOL,
        )
    return unitary


def mas_from_small_t(t: SubspaceBasis, tol: float = DEFAULT_TOL) -> tuple[SubspaceBasis, EigenFrame]:
    """Get a MAS and its frame orthogonal to a T of dimension at most two."""
    if t.count > 2:  # noqa: PLR2004
        raise ValueError(f"Expected T of dimension at most 2, got {t.count}!")
    dim = t.dim_ambient
    zero = np.zeros((dim, dim), dtype=np.complex128)
    h = t[0] if t.count >= 1 else zero
    a = t[1] if t.count >= 2 else zero  # noqa: PLR2004
    frame = EigenFrame(zero_diagonal_pair(h, a, tol))
    return orthonormalize(frame.projectors(), tol), frame


def _check_frame(tperp: SubspaceBasis, frame: EigenFrame) -> None:
    """Validate every frame projector lies in T-perp."""
    worst = max(residual(tperp, projector) for projector in frame.projectors())
    if worst > FRAME_TOL:
        raise InternalConsistencyError(f"A frame projector is {worst:.3g} away from T-perp!")


def decide(
    ts: TSpaces,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    retries: int = DEFAULT_RETRIES,
) -> MasDecision:
    """
    Decide whether T-perp contains a MAS, constructing it when one exists.

    With D = dim T-perp and d the local dimension, the branches are tried in
    order: D <= d - 1 cannot hold a MAS; D = d holds one exactly when it is
    abelian; D >= d^2 - 2 always holds one; D = d + 1 is settled by the
    commutator bound or the Gamma rank test; larger D is only refutable by the
    commutator bound.

    Args:
        ts: The subspaces for one initiating party.
        tol: The numerical rank and commutation tolerance.
        seed: The seed for simultaneous diagonalisation.
        retries: The extra random combinations simultaneous diagonalisation may try.

    Returns:
        The decision for the party.
    """
    dim = ts.dim
    tperp = ts.tperp
    dim_tperp = tperp.count
    side = ts.side
    logger.info("Deciding side %s with d = %d and dim T-perp = %d", side.value, dim, dim_tperp)

    def distinguishable(reason: Reason, mas: SubspaceBasis, frame: EigenFrame, **evidence: Any) -> MasDecision:
        """Build a positive decision after checking the frame."""
        _check_frame(tperp, frame)
        return MasDecision(
            side, dim_tperp, Verdict.DISTINGUISHABLE_PROJECTIVE, reason, mas, frame, evidence
        )

    if dim_tperp <= dim - 1:
        return MasDecision(side, dim_tperp, Verdict.NOT_DISTINGUISHABLE, Reason.TPERP_TOO_SMALL)

    if dim_tperp == dim:
        if not is_abelian(tperp, tol):
            return MasDecision(
                side, dim_tperp, Verdict.NOT_DISTINGUISHABLE, Reason.TPERP_NOT_ABELIAN
            )
        frame = simultaneous_diagonalize(tperp, tol, retries, seed)
        return distinguishable(Reason.TPERP_IS_MAS, tperp, frame)

    if dim_tperp >= dim * dim - 2:
        mas, frame = mas_from_small_t(ts.t, tol)
        return distinguishable(Reason.SMALL_T_ALWAYS_CONTAINS_MAS, mas, frame)

    if dim_tperp == dim + 1:
        refutation = commutator_bound_refute(tperp, tol)
        if refutation is not None:
            return MasDecision(
                side,
                dim_tperp,
                Verdict.NO_PROJECTIVE_PROTOCOL,
                Reason.COMMUTATOR_DIMENSION_EXCEEDS_BOUND,
                evidence=refutation.as_dict(),
            )
        try:
            outcome = gamma_rank_decide(tperp, tol, retries=retries, seed=seed)
        except RankAmbiguity as error:
            logger.warning("Gamma rank test is ambiguous: %s", error)
            return MasDecision(
                side,
                dim_tperp,
                Verdict.INCONCLUSIVE,
                Reason.RANK_AMBIGUITY,
                evidence={"singular_values": error.singular_values, "cutoff": error.cutoff},
            )
        evidence = {
            "dim_commutator": outcome.analysis.dim_commutator,
            "omega_ranks": list(outcome.analysis.omega_ranks),
            "dim_support_intersection": len(outcome.analysis.support_intersection),
        }
        if outcome.mas is None or outcome.frame is None:
            return MasDecision(
                side,
                dim_tperp,
                Verdict.NO_PROJECTIVE_PROTOCOL,
                Reason.GAMMA_RANK_TEST_FAILED,
                evidence=evidence,
            )
        return distinguishable(Reason.GAMMA_RANK_TEST_PASSED, outcome.mas, outcome.frame, **evidence)

    found = commutator_evidence(tperp, tol)
    if found.refutes:
        return MasDecision(
            side,
            dim_tperp,
            Verdict.NO_PROJECTIVE_PROTOCOL,
            Reason.COMMUTATOR_DIMENSION_EXCEEDS_BOUND,
            evidence=found.as_dict(),
        )
    return MasDecision(
        side,
        dim_tperp,
        Verdict.INCONCLUSIVE,
        Reason.UNDECIDED_DIMENSION_REGION,
        evidence=found.as_dict(),
    )
