"""Dense symmetric linear algebra shared by all estimators.

Matrices are plain float64 numpy arrays of shape (d, d); samples are
(N, d) arrays of observation rows.  All operations are pure and leave
their inputs untouched.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

#: symmetry / PSD slack relative to the matrix scale
SYM_TOL = 1e-10


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


def check_symmetric(M) -> np.ndarray:
    """Validate and return M as an exactly symmetric float array."""
    M = as_matrix(M)
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > SYM_TOL * scale:
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def as_sample(rows) -> np.ndarray:
    """Validate an (N, d) sample of observation rows."""
    X = np.asarray(rows, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInputError(f"expected an (N, d) sample, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("sample has non-finite entries")
    return X


def op_norm(M) -> float:
    """Operator norm of a symmetric matrix: max |eigenvalue|."""
    M = check_symmetric(M)
    return float(np.abs(np.linalg.eigvalsh(M)).max())


def psd_project(M) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero."""
    M = check_symmetric(M)
    w, U = np.linalg.eigh(M)
    w = np.maximum(w, 0.0)
    P = (U * w) @ U.T
    return 0.5 * (P + P.T)


def effective_rank(S) -> float:
    """tr(S) / op_norm(S) for a nonzero PSD matrix; lies in [1, d]."""
    S = check_symmetric(S)
    top = op_norm(S)
    if top <= 0.0:
        raise InvalidInputError("effective rank undefined for the zero matrix")
    return float(np.trace(S)) / top


def sample_covariance(rows) -> np.ndarray:
    """Uncentered second-moment matrix (1/N) sum_i x_i x_i^T.

    Data is assumed zero mean; centering, when wanted, is the caller's
    job (the CLI exposes it as a flag).
    """
    X = as_sample(rows)
    G = (X.T @ X) / X.shape[0]
    return 0.5 * (G + G.T)
