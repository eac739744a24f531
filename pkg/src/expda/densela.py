"""Dense linear-algebra kernels used by the factorization path and the oracles.

Thin, contract-enforcing wrappers around LAPACK via numpy.linalg:

qr_skinny
    reduced Householder QR of a tall matrix, diagonal of R made nonnegative
svd_small
    singular value decomposition of a small square matrix
sym_eig
    symmetric eigendecomposition, eigenvalues in descending order
expm_sym
    dense symmetric matrix exponential through the spectral decomposition

``expm_sym`` is a reference routine: it materializes a d x d matrix and is
therefore capped at ``oracle_cap`` to keep O(d^3) work out of the fast path.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import DimensionError, OracleScaleError, SymmetryError

#: Dimension limit for dense d x d reference computations.
DEFAULT_ORACLE_CAP = 1000


class QRFactors(NamedTuple):
    q: np.ndarray  # d x m, orthonormal columns
    r: np.ndarray  # m x m, upper triangular, diag >= 0


class SVDFactors(NamedTuple):
    u: np.ndarray      # m x m orthogonal
    sigma: np.ndarray  # singular values, descending
    v: np.ndarray      # m x m orthogonal


class SymEig(NamedTuple):
    values: np.ndarray   # eigenvalues, descending
    vectors: np.ndarray  # orthonormal columns, matching order


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite float64 2-D array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"matrix must be at least 1x1, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_oracle_scale(dim: int, oracle_cap: int, what: str) -> None:
    if dim > oracle_cap:
        raise OracleScaleError(
            f"{what} is a dense reference computation; dimension {dim} "
            f"exceeds the oracle cap {oracle_cap}"
        )


def qr_skinny(a) -> QRFactors:
    """Reduced QR factorization a = q r of a tall (d >= m) matrix.

    Column signs are flipped so that diag(r) >= 0, which makes the factors
    deterministic across runs. Rank-deficient columns yield zero rows of r.
    """
    a = as_matrix(a)
    d, m = a.shape
    if d < m:
        raise DimensionError(f"qr_skinny needs rows >= cols, got {d}x{m}")
    q, r = np.linalg.qr(a, mode="reduced")
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    return QRFactors(q, r)


def svd_small(r) -> SVDFactors:
    """Full SVD r = u diag(sigma) v^T of a small square matrix."""
    r = as_matrix(r)
    if r.shape[0] != r.shape[1]:
        raise DimensionError(f"svd_small expects a square matrix, got {r.shape}")
    u, sigma, vh = np.linalg.svd(r)
    return SVDFactors(u, sigma, vh.T)


def _check_symmetric(a: np.ndarray) -> None:
    scale = np.abs(a).max()
    if scale == 0.0:
        return
    asym = np.abs(a - a.T).max()
    if asym > 1e-12 * scale:
        raise SymmetryError(
            f"matrix is not symmetric: max |a - a^T| = {asym:.3e} "
            f"(scale {scale:.3e})"
        )


def sym_eig(a) -> SymEig:
    """Eigendecomposition a = X diag(values) X^T of a symmetric matrix.

    Eigenvalues are returned in descending order with matching orthonormal
    eigenvector columns.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"sym_eig expects a square matrix, got {a.shape}")
    _check_symmetric(a)
    w, x = np.linalg.eigh(a)
    # stable descending order keeps tie-broken eigenvectors deterministic
    order = np.argsort(-w, kind="stable")
    return SymEig(w[order], x[:, order])


def expm_sym(a, oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Dense exp(a) for symmetric a via the spectral decomposition.

    Valid only at oracle/test scale; raises OracleScaleError above the cap.
    The result is exactly symmetrized and is symmetric positive definite.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expm_sym expects a square matrix, got {a.shape}")
    check_oracle_scale(a.shape[0], oracle_cap, "expm_sym")
    values, vectors = sym_eig(a)
    e = (vectors * np.exp(values)) @ vectors.T
    return 0.5 * (e + e.T)
