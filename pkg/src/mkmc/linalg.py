"""Dense symmetric-matrix primitives.

Everything downstream (views, completion engines, evaluation) works with
plain float64 ndarrays that are kept exactly symmetric via :func:`symmetrize`.
Log-determinants go through Cholesky for speed and stability; the full
eigendecomposition is reserved for model updates and diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, NotPositiveDefiniteError, NumericalError

# Relative floor used by default when testing positive definiteness.
PD_FLOOR_REL = 1e-12


def symmetrize(raw) -> np.ndarray:
    """Return the symmetric part (A + A^T)/2 of a square matrix."""
    a = np.asarray(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return (a + a.T) / 2.0


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition with eigenvalues sorted non-increasing.

    Columns of ``eigenvectors`` are orthonormal and aligned with
    ``eigenvalues``; each column's largest-magnitude entry is positive so the
    decomposition is deterministic up to degenerate eigenspaces.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh_sorted(a: np.ndarray) -> EigenDecomposition:
    """Symmetric eigendecomposition, eigenvalues sorted descending."""
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed on {a.shape[0]}x{a.shape[0]} matrix "
            f"(fro norm {np.linalg.norm(a):.3e})"
        ) from exc
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def default_pd_floor(a: np.ndarray) -> float:
    """Floor for PD checks: relative to the mean diagonal magnitude."""
    ell = a.shape[0]
    return PD_FLOOR_REL * abs(np.trace(a)) / ell


def is_positive_definite(a: np.ndarray, floor: float = 0.0) -> bool:
    """True iff the minimum eigenvalue of ``a`` exceeds ``floor``."""
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    return bool(np.linalg.eigvalsh(a)[0] > floor)


def cholesky_lower(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises if ``a`` is not positive definite."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            f"matrix of dim {a.shape[0]} is not positive definite"
        ) from exc


def logdet(a: np.ndarray) -> float:
    """log det of a positive definite matrix, via Cholesky."""
    chol = cholesky_lower(a)
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def logdet_divergence(q: np.ndarray, m: np.ndarray) -> float:
    """LogDet (Stein-type) Bregman divergence between PD matrices.

    0.5 * (logdet M - logdet Q + <M^{-1}, Q - M>); nonnegative, zero iff
    Q == M. The inverse is never formed explicitly.
    """
    check_same_dim(q, m)
    ell = q.shape[0]
    chol_m = cholesky_lower(m)
    logdet_m = float(2.0 * np.sum(np.log(np.diag(chol_m))))
    logdet_q = logdet(q)
    try:
        minv_q = sla.cho_solve((chol_m, True), q)
    except sla.LinAlgError as exc:  # pragma: no cover - cho_solve rarely fails
        raise NumericalError("triangular solve failed in LogDet divergence") from exc
    return 0.5 * (logdet_m - logdet_q + float(np.trace(minv_q)) - ell)
