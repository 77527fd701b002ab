#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Randomised cross-checks of the decision procedure.

Nothing here is on the main decision path: a frame found by search is a
certificate, but a failed search proves nothing.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm
from scipy.optimize import least_squares

from locc_oneway.hermspace import (
    DEFAULT_TOL,
    EigenFrame,
    gell_mann_basis,
    orthonormalize,
    vectorize,
)
from locc_oneway.protocol import vector_feasible
from locc_oneway.states import Side, haar_orthonormal, haar_state_set, spectral_decompose
from locc_oneway.tspace import PairOperators, build_pair_operators, build_tspaces

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_ATTEMPTS = 64


@dataclass(frozen=True)
class GenericityReport:
    """The histogram of dim T-perp over Haar-random state sets."""

    d: int
    n: int
    samples: int
    seed: int
    dim_histogram: dict[int, int]
    det_diagnostics: tuple[float, ...] | None = None


def random_feasible_frame_search(
    ops: PairOperators,
    attempts: int = DEFAULT_ORACLE_ATTEMPTS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> EigenFrame | None:
    """
    Search for an orthonormal frame whose vectors are all feasible.

    Each attempt starts from a Haar-random unitary U0 and minimises the
    diagonals of U^dagger tau U over an orthonormal basis {tau} of T, with
    U = U0 exp(i sum_a x_a G_a) parametrised by the Gell-Mann basis.

    Args:
        ops: The pair operators of one initiating party.
        attempts: The number of random restarts.
        seed: The seed of the restart generator.
        tol: The feasibility tolerance on every |<v|W|v>|.

    Returns:
        A feasible frame, or None if no restart found one.
    """
    dim = ops.dim
    if len(ops) == 0:
        return EigenFrame(np.eye(dim, dtype=np.complex128))

    generators = np.concatenate([ops.hermitian_parts, ops.antihermitian_parts])
    t = orthonormalize(generators, tol, dim=dim, atol=tol)
    directions = gell_mann_basis(dim)

    def unitary(start: NDArray[np.complex128], x: NDArray[np.float64]) -> NDArray[np.complex128]:
        """Get U0 exp(i x.G)."""
        return np.asarray(start @ expm(1j * np.einsum("a,aij->ij", x, directions)))

    def diagonals(x: NDArray[np.float64], start: NDArray[np.complex128]) -> NDArray[np.float64]:
        """Get the diagonals of U^dagger tau U for every tau."""
        u = unitary(start, x)
        return np.einsum("ik,tij,jk->tk", u.conj(), t.elements, u).real.ravel()

    # Levenberg-Marquardt needs at least as many residuals as parameters
    method = "lm" if t.count * dim >= dim * dim else "trf"
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        start = haar_orthonormal(dim, dim, rng)
        fit = least_squares(
            diagonals,
            np.zeros(dim * dim),
            args=(start,),
            method=method,
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        frame = EigenFrame(unitary(start, fit.x))
        worst = max(vector_feasible(vector, ops, tol)[1] for vector in frame)
        if worst <= tol:
            logger.info("Frame search succeeded on attempt %d", attempt + 1)
            return frame
        logger.debug("Frame search attempt %d stopped at violation %.3g", attempt + 1, worst)
    return None


def _sample_dimension(
    d: int, n: int, seed: np.random.SeedSequence, *, det: bool, tol: float
) -> tuple[int, float | None]:
    """Get dim T-perp, and optionally Det(M M^T), for one Haar-random state set."""
    spec = spectral_decompose(haar_state_set(d, n, np.random.default_rng(seed)), tol)
    ops = build_pair_operators(spec, Side.A)
    ts = build_tspaces(ops, tol)
    if not det:
        return ts.tperp.count, None
    stack = vectorize(np.concatenate([ops.hermitian_parts, ops.antihermitian_parts]))
    return ts.tperp.count, float(np.linalg.det(stack @ stack.T))


def genericity_sample(
    d: int,
    n: int,
    samples: int,
    seed: int,
    *,
    det: bool = False,
    workers: int = 1,
    tol: float = DEFAULT_TOL,
) -> GenericityReport:
    """Histogram dim T-perp over Haar-random orthonormal n-families in C^d x C^d."""
    if d < 1 or not 1 <= n <= d * d:
        raise ValueError(f"Need 1 <= n <= d^2 for d={d}, got n={n}!")
    if samples < 1:
        raise ValueError(f"Need at least one sample, got {samples}!")

    children = np.random.SeedSequence(seed).spawn(samples)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(
            executor.map(lambda child: _sample_dimension(d, n, child, det=det, tol=tol), children)
        )

    histogram: dict[int, int] = {}
    for dimension, _ in results:
        histogram[dimension] = histogram.get(dimension, 0) + 1
    logger.info("Genericity histogram for d=%d, n=%d: %s", d, n, histogram)
    return GenericityReport(
        d,
        n,
        samples,
        seed,
        dict(sorted(histogram.items())),
        tuple(value for _, value in results if value is not None) if det else None,
    )
