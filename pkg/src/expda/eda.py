"""End-to-end dimensionality-reduction pipelines and the trace criteria.

The two fast pipelines run a restarted Krylov solver against the factorized
exponential operators; the dense pipeline is the oracle-scale reference.
Classical LDA and PCA+LDA are the comparison baselines. Every pipeline
returns a ProjectionBasis with orthonormal columns ordered by descending
eigenvalue, sign-normalized so repeated runs produce identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densela import DEFAULT_ORACLE_CAP, qr_skinny, sym_eig
from .exceptions import DimensionError, SingularScatterError
from .expops import (
    MODE_NONSYM,
    MODE_SYM,
    ExponentialOperator,
    ScatterFactorization,
    apply_sqrt_inv_w,
    dense_operator,
    preprocess,
)
from .krylov import DEFAULT_MAX_RESTARTS, solve_dominant
from .scatter import LabeledDataset, ScatterPair, build_scatter, dense_scatter

#: Methods understood by fit_method and the experiment runner.
METHODS = ("arnoldi_eda", "lanczos_eda", "eda_dense", "classical_lda", "lda_pca")

#: Relative rank cutoff for the pseudo-inverse of a singular s_w.
LDA_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ProjectionBasis:
    """Orthonormal projection matrix with its defining eigenvalues.

    ``sss`` marks results computed under the small-sample-size condition
    (singular within-class scatter), where classical LDA is degenerate.
    """

    v: np.ndarray
    method: str
    tol: float | None
    eigenvalues: np.ndarray
    sss: bool = False

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def t(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class CriterionValue:
    value: float
    method: str


def _sign_fix(v: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude component positive."""
    v = v.copy()
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0.0:
            v[:, j] = -v[:, j]
    return v


def orthonormalize(x: np.ndarray) -> np.ndarray:
    """Orthonormalize columns in order (QR) and apply the sign convention."""
    return _sign_fix(qr_skinny(x).q)


def _check_t(t: int, d: int) -> None:
    if not 1 <= t <= d:
        raise DimensionError(f"t must satisfy 1 <= t <= d={d}, got {t}")


def fit_arnoldi_eda(ds: LabeledDataset, t: int, tol: float = 1e-4, seed=0,
                    max_basis: int | None = None,
                    max_restarts: int = DEFAULT_MAX_RESTARTS,
                    backend: str = "auto") -> ProjectionBasis:
    """Dominant eigenspace of exp(-s_w) exp(s_b) via restarted Arnoldi.

    The basis spans the computed dominant eigenspace; columns are
    orthonormalized after extraction. Typically t = k - 1.
    """
    _check_t(t, ds.dim)
    f = preprocess(build_scatter(ds))
    op = ExponentialOperator(f, MODE_NONSYM, backend)
    pairs = solve_dominant(op, t, tol, max_basis=max_basis,
                           max_restarts=max_restarts, seed=seed)
    values = np.array([float(np.real(p.value)) for p in pairs])
    x = np.column_stack([p.vector for p in pairs])
    return ProjectionBasis(orthonormalize(x), "arnoldi_eda", tol, values)


def fit_lanczos_eda(ds: LabeledDataset, t: int, tol: float = 1e-4, seed=0,
                    max_basis: int | None = None,
                    max_restarts: int = DEFAULT_MAX_RESTARTS,
                    backend: str = "auto") -> ProjectionBasis:
    """Dominant eigenspace via Lanczos on the symmetric operator.

    Solves m y = lambda y, then back-transforms each eigenvector through
    exp(-s_w)^{1/2} before orthonormalizing.
    """
    _check_t(t, ds.dim)
    f = preprocess(build_scatter(ds))
    op = ExponentialOperator(f, MODE_SYM, backend)
    pairs = solve_dominant(op, t, tol, max_basis=max_basis,
                           max_restarts=max_restarts, seed=seed)
    values = np.array([float(np.real(p.value)) for p in pairs])
    x = np.column_stack(
        [apply_sqrt_inv_w(f, p.vector, backend) for p in pairs])
    return ProjectionBasis(orthonormalize(x), "lanczos_eda", tol, values)


def fit_eda_dense(ds: LabeledDataset, t: int,
                  oracle_cap: int = DEFAULT_ORACLE_CAP) -> ProjectionBasis:
    """Dense reference pipeline at oracle scale.

    Materializes the symmetric operator, takes its top eigenpairs, and
    back-transforms; equivalent to the nonsymmetric product eigenproblem.
    """
    _check_t(t, ds.dim)
    f = preprocess(build_scatter(ds))
    m = dense_operator(f, MODE_SYM, oracle_cap)
    values, vectors = sym_eig(m)
    x = np.column_stack([apply_sqrt_inv_w(f, vectors[:, j]) for j in range(t)])
    return ProjectionBasis(orthonormalize(x), "eda_dense", None,
                           values[:t].copy())


def _lda_directions(s_w: np.ndarray, s_b: np.ndarray, t: int):
    """Top-t directions of the pencil s_b x = lambda s_w x via pseudo-inverse.

    Works on the range of s_w with rank cutoff LDA_RANK_RTOL * ||s_w||_2 and
    reports whether the small-sample-size condition (singular s_w) was hit.
    """
    d = s_w.shape[0]
    ew_values, ew_vectors = sym_eig(s_w)
    cutoff = LDA_RANK_RTOL * max(ew_values[0], 0.0)
    rank = int(np.sum(ew_values > cutoff))
    sss = rank < d
    if rank == 0:
        w_half_pinv = np.zeros((d, d))
    else:
        e_r = ew_vectors[:, :rank]
        w_half_pinv = (e_r / np.sqrt(ew_values[:rank])) @ e_r.T
    c = w_half_pinv @ s_b @ w_half_pinv
    c_values, c_vectors = sym_eig(0.5 * (c + c.T))
    x = w_half_pinv @ c_vectors[:, :t]
    return x, c_values[:t].copy(), sss


def fit_classical_lda(ds: LabeledDataset, t: int,
                      oracle_cap: int = DEFAULT_ORACLE_CAP) -> ProjectionBasis:
    """Classical ratio-trace LDA baseline at oracle scale.

    Under the small-sample-size condition the pencil is singular; the result
    is then restricted to the range of s_w (or degenerate when s_w = 0) and
    flagged via ``sss``.
    """
    _check_t(t, ds.dim)
    s_w, s_b = dense_scatter(build_scatter(ds), oracle_cap)
    x, values, sss = _lda_directions(s_w, s_b, t)
    return ProjectionBasis(orthonormalize(x), "classical_lda", None, values,
                           sss=sss)


def fit_lda_pca(ds: LabeledDataset, t: int, energy: float = 0.99) -> ProjectionBasis:
    """PCA to the smallest subspace holding ``energy`` of the variance, then LDA.

    Zero-variance directions are always dropped. Raises if the reduced
    dimension cannot support t directions.
    """
    _check_t(t, ds.dim)
    if not 0.0 < energy <= 1.0:
        raise ValueError(f"energy must be in (0, 1], got {energy}")
    mu = ds.data.mean(axis=1)
    centered = ds.data - mu[:, None]
    u, sigma, _ = np.linalg.svd(centered, full_matrices=False)
    variance = sigma * sigma
    total = float(variance.sum())
    rank = int(np.sum(sigma > 1e-12 * sigma[0])) if sigma.size and sigma[0] > 0 else 0
    if rank == 0:
        raise DimensionError("data has no variance; PCA stage is empty")
    target = energy * total * (1.0 - 1e-12)
    p = int(np.searchsorted(np.cumsum(variance), target) + 1)
    p = min(p, rank)
    if p < t:
        raise DimensionError(
            f"PCA stage kept {p} dimensions at energy={energy}, need t={t}")
    u_p = u[:, :p]
    reduced = LabeledDataset(u_p.T @ ds.data, ds.labels, normalized=False)
    s_w, s_b = dense_scatter(build_scatter(reduced), oracle_cap=p)
    x, values, sss = _lda_directions(s_w, s_b, t)
    v = _sign_fix(u_p @ qr_skinny(x).q)
    return ProjectionBasis(v, "lda_pca", None, values, sss=sss)


def as_factorization(source) -> ScatterFactorization:
    """Coerce a dataset, scatter pair, or factorization to a factorization."""
    if isinstance(source, ScatterFactorization):
        return source
    if isinstance(source, ScatterPair):
        return preprocess(source)
    if isinstance(source, LabeledDataset):
        return preprocess(build_scatter(source))
    raise TypeError(f"cannot derive scatter factorization from {type(source)!r}")


def criterion(source, v, which: str = "eda") -> CriterionValue:
    """Ratio-trace criterion value of a projection basis.

    For "eda" this is tr((V^T exp(s_w) V)^{-1} (V^T exp(s_b) V)); for "lda"
    the same with the raw scatter matrices. Only t x t inner matrices are
    formed, through the factorization. The LDA variant raises
    SingularScatterError when its inner matrix is singular.
    """
    f = as_factorization(source)
    vb = v.v if isinstance(v, ProjectionBasis) else np.asarray(v, dtype=float)
    if vb.ndim != 2 or vb.shape[0] != f.dim:
        raise DimensionError(f"projection must be {f.dim} x t, got {vb.shape}")
    gram = vb.T @ vb
    if np.abs(gram - np.eye(vb.shape[1])).max() > 1e-8:
        raise ValueError("projection columns must be orthonormal")
    g_b = vb.T @ f.q_b
    g_w = vb.T @ f.q_w
    if which == "eda":
        b_t = gram + (g_b * f.em1_b) @ g_b.T
        w_t = gram + (g_w * np.expm1(f.d_w)) @ g_w.T
    elif which == "lda":
        b_t = (g_b * f.d_b) @ g_b.T
        w_t = (g_w * f.d_w) @ g_w.T
        w_eigs = np.linalg.eigvalsh(0.5 * (w_t + w_t.T))
        if w_eigs[0] <= 1e-12 * max(w_eigs[-1], 1e-300):
            raise SingularScatterError(
                "V^T s_w V is singular (small-sample-size condition)")
    else:
        raise ValueError(f"which must be 'eda' or 'lda', got {which!r}")
    value = float(np.trace(np.linalg.solve(w_t, b_t)))
    return CriterionValue(value, which)


def fit_method(name: str, ds: LabeledDataset, t: int, tol: float = 1e-4,
               seed=0, oracle_cap: int = DEFAULT_ORACLE_CAP,
               energy: float = 0.99, backend: str = "auto") -> ProjectionBasis:
    """Dispatch a fit by method name; dense baselines ignore tol and seed."""
    if name == "arnoldi_eda":
        return fit_arnoldi_eda(ds, t, tol=tol, seed=seed, backend=backend)
    if name == "lanczos_eda":
        return fit_lanczos_eda(ds, t, tol=tol, seed=seed, backend=backend)
    if name == "eda_dense":
        return fit_eda_dense(ds, t, oracle_cap=oracle_cap)
    if name == "classical_lda":
        return fit_classical_lda(ds, t, oracle_cap=oracle_cap)
    if name == "lda_pca":
        return fit_lda_pca(ds, t, energy=energy)
    raise ValueError(f"unknown method {name!r}; known: {METHODS}")
