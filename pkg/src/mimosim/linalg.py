"""Dense complex-matrix kernel with pinned decomposition conventions.

All computation is double-precision complex. The QR factor convention
(strictly positive real diagonal of R) and the lower-triangular Cholesky
variant are fixed here so every higher-level identity test compares
against the same factor pair.
"""

import numpy as np

from .errors import (
    DecompositionError,
    InvalidInputError,
    RankDeficiencyError,
    SingularMatrixError,
)

# Singular values below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-12
# Inversions beyond this condition number raise instead of returning garbage.
CONDITION_LIMIT = 1e12


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def herm(m: np.ndarray) -> np.ndarray:
    """Hermitian transpose."""
    return m.conj().T


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD, M = U @ diag(S) @ Vh with S sorted descending."""
    a = as_cmatrix(m)
    return np.linalg.svd(a, full_matrices=True)


def svd_reduced(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Economy SVD, U: m x k, S: k, Vh: k x n with k = min(m, n)."""
    a = as_cmatrix(m)
    return np.linalg.svd(a, full_matrices=False)


def qr(m) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with the diagonal of R forced strictly positive real.

    The phase of each column of Q is absorbed so that the factor pair is
    unique; rank-deficient input raises RankDeficiencyError.
    """
    a = as_cmatrix(m)
    if a.shape[0] < a.shape[1]:
        raise RankDeficiencyError(
            f"matrix of shape {a.shape} cannot have full column rank"
        )
    q, r = np.linalg.qr(a, mode="reduced")
    d = np.diagonal(r)
    mags = np.abs(d)
    if mags.size == 0 or np.min(mags) <= RANK_RTOL * max(np.max(mags), 0.0) or np.max(mags) == 0.0:
        raise RankDeficiencyError(
            f"matrix of shape {a.shape} is rank deficient; QR requires full column rank"
        )
    phases = d / mags
    q = q * phases[np.newaxis, :]
    r = r * phases.conj()[:, np.newaxis]
    # Kill rounding residue on the diagonal's imaginary part.
    n = r.shape[0]
    r[np.arange(n), np.arange(n)] = mags
    return q, r


def cholesky(r) -> np.ndarray:
    """Lower-triangular Cholesky factor L with L @ herm(L) = R."""
    a = as_cmatrix(r)
    if a.shape[0] != a.shape[1]:
        raise DecompositionError(f"Cholesky input must be square, got {a.shape}")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - herm(a)) > 1e-10 * max(scale, 1e-300):
        raise DecompositionError("Cholesky input is not Hermitian")
    sym = 0.5 * (a + herm(a))
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(
            "matrix is not positive definite (pivot <= 0)"
        ) from exc


def pinv(m) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the pinned singular-value cutoff."""
    a = as_cmatrix(m)
    return np.linalg.pinv(a, rcond=RANK_RTOL)


def cond(m) -> float:
    """2-norm condition number; inf for a singular matrix."""
    s = np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)
    if s.size == 0 or s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def is_full_rank(m, rtol: float = RANK_RTOL) -> bool:
    """True when min(shape) singular values exceed rtol * sigma_max."""
    s = np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return False
    return bool(s[-1] > rtol * s[0])


def solve_hermitian(m: np.ndarray, b: np.ndarray, context: str = "") -> np.ndarray:
    """Solve M X = B for Hermitian M, guarded by the condition-number limit."""
    sym = 0.5 * (m + herm(m))
    c = cond(sym)
    if not np.isfinite(c) or c >= CONDITION_LIMIT:
        where = f" ({context})" if context else ""
        raise SingularMatrixError(
            f"matrix is singular or near-singular (condition number {c:.3g}){where}"
        )
    return np.linalg.solve(sym, b)
