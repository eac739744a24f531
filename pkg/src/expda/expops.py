"""Low-rank factorization of the scatter pair and fast exponential matvecs.

Because s_w = h_w h_w^T and s_b = h_b h_b^T, a skinny QR of each factor
followed by a small SVD yields orthonormal q_w, q_b and nonnegative spectra
d_w, d_b with s_w = q_w diag(d_w) q_w^T (and likewise for s_b). Any function
of the scatter matrices is then a rank-limited update of the identity; for
the exponential,

    exp(s_b)          = I + q_b (exp(d_b) - 1) q_b^T
    exp(-s_w)         = I + q_w (exp(-d_w) - 1) q_w^T
    exp(-s_w)^{1/2}   = I + q_w (exp(-d_w / 2) - 1) q_w^T

so each exponential-vector product costs O((k + n) d): two skinny gemvs.
Neither the scatter matrices nor their exponentials are ever formed at full
dimension outside the dense reference routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import get_kernel
from .densela import DEFAULT_ORACLE_CAP, check_oracle_scale, qr_skinny, svd_small
from .exceptions import DimensionError
from .scatter import ScatterPair

#: Singular values below this times sigma_max are truncated to exact zero
#: before squaring into the spectra, so rank-deficient directions take the
#: exact exp(0) = 1 branch instead of carrying noise eigenvalues near 1.
SV_TRUNCATION_RTOL = 1e-12

MODE_NONSYM = "nonsymmetric"
MODE_SYM = "symmetric"
MODE_SQRT_INV_W = "sqrt_inv_w"

OPERATOR_MODES = (MODE_NONSYM, MODE_SYM, MODE_SQRT_INV_W)


@dataclass(frozen=True)
class ScatterFactorization:
    """Orthonormal factors and spectra of the scatter pair.

    ``q_b`` (d x k) and ``q_w`` (d x n) have orthonormal columns; ``d_b``
    and ``d_w`` are the nonnegative eigenvalues of the respective scatter
    matrices restricted to their ranges, sorted descending. The exponential
    diagonals used by both solver branches are cached at construction.
    """

    q_b: np.ndarray
    d_b: np.ndarray
    q_w: np.ndarray
    d_w: np.ndarray
    exp_db: np.ndarray = field(init=False, repr=False)
    exp_neg_dw: np.ndarray = field(init=False, repr=False)
    exp_neg_half_dw: np.ndarray = field(init=False, repr=False)
    # exp(diag) - 1 via expm1, the form the matvec kernel consumes
    em1_b: np.ndarray = field(init=False, repr=False)
    em1_neg_w: np.ndarray = field(init=False, repr=False)
    em1_neg_half_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "exp_db", np.exp(self.d_b))
        object.__setattr__(self, "exp_neg_dw", np.exp(-self.d_w))
        object.__setattr__(self, "exp_neg_half_dw", np.exp(-0.5 * self.d_w))
        object.__setattr__(self, "em1_b", np.expm1(self.d_b))
        object.__setattr__(self, "em1_neg_w", np.expm1(-self.d_w))
        object.__setattr__(self, "em1_neg_half_w", np.expm1(-0.5 * self.d_w))

    @property
    def dim(self) -> int:
        return self.q_b.shape[0]


def preprocess(sp: ScatterPair) -> ScatterFactorization:
    """Factorize the scatter pair once; O(d n^2), no d x d intermediate.

    Skinny QR of each factor matrix, SVD of the small triangular parts,
    absorb the left singular vectors into the orthonormal factors, square
    the singular values into the spectra. Right singular vectors are
    discarded. Singular values below SV_TRUNCATION_RTOL * sigma_max are
    zeroed first. A factor wider than tall (n > d, outside the undersampled
    regime) goes through a direct economy SVD instead; the resulting
    factorization is identical in meaning, with width min(d, n).
    """
    factors = []
    for h in (sp.h_b, sp.h_w):
        if h.shape[0] >= h.shape[1]:
            q, r = qr_skinny(h)
            u, sigma, _ = svd_small(r)
            q_tilde = np.asfortranarray(q @ u)
        else:
            q_tilde, sigma, _ = np.linalg.svd(h, full_matrices=False)
            q_tilde = np.asfortranarray(q_tilde)
        if sigma.size and sigma[0] > 0.0:
            sigma = np.where(sigma < SV_TRUNCATION_RTOL * sigma[0], 0.0, sigma)
        factors.append((q_tilde, sigma * sigma))
    (q_b, d_b), (q_w, d_w) = factors
    return ScatterFactorization(q_b=q_b, d_b=d_b, q_w=q_w, d_w=d_w)


def _check_vector(f: ScatterFactorization, v) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=float)
    if v.shape != (f.dim,):
        raise DimensionError(f"expected a vector of length {f.dim}, got {v.shape}")
    return v


def _apply_factor(kernel, q, em1, v):
    out = np.empty_like(v)
    work = np.empty(q.shape[1])
    kernel(q, em1, v, out, work)
    return out


def exp_factor_apply(q, diag, v, backend: str = "auto") -> np.ndarray:
    """Apply I + q (exp(diag) - 1) q^T to v. Exposed for tests and oracles."""
    q = np.asfortranarray(q, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    return _apply_factor(get_kernel(backend), q, np.expm1(diag), v)


def apply_nonsym(f: ScatterFactorization, v, backend: str = "auto") -> np.ndarray:
    """exp(-s_w) exp(s_b) v in two low-rank update steps."""
    v = _check_vector(f, v)
    kernel = get_kernel(backend)
    v = _apply_factor(kernel, f.q_b, f.em1_b, v)
    return _apply_factor(kernel, f.q_w, f.em1_neg_w, v)


def apply_sym(f: ScatterFactorization, v, backend: str = "auto") -> np.ndarray:
    """m v = exp(-s_w)^{1/2} exp(s_b) exp(-s_w)^{1/2} v in three steps.

    The operator is self-adjoint and positive definite.
    """
    v = _check_vector(f, v)
    kernel = get_kernel(backend)
    v = _apply_factor(kernel, f.q_w, f.em1_neg_half_w, v)
    v = _apply_factor(kernel, f.q_b, f.em1_b, v)
    return _apply_factor(kernel, f.q_w, f.em1_neg_half_w, v)


def apply_sqrt_inv_w(f: ScatterFactorization, v, backend: str = "auto") -> np.ndarray:
    """exp(-s_w)^{1/2} v; back-transforms symmetric-branch eigenvectors."""
    v = _check_vector(f, v)
    return _apply_factor(get_kernel(backend), f.q_w, f.em1_neg_half_w, v)


@dataclass(frozen=True)
class ExponentialOperator:
    """Matvec handle for one of the three exponential operators.

    Exposes only the action on a vector, never matrix entries; the
    factorization is immutable, so concurrent applications are safe.
    """

    factors: ScatterFactorization
    mode: str = MODE_NONSYM
    backend: str = "auto"

    def __post_init__(self):
        if self.mode not in OPERATOR_MODES:
            raise ValueError(f"mode must be one of {OPERATOR_MODES}, got {self.mode!r}")
        get_kernel(self.backend)  # fail fast on unknown backends

    @property
    def dim(self) -> int:
        return self.factors.dim

    @property
    def symmetric(self) -> bool:
        return self.mode in (MODE_SYM, MODE_SQRT_INV_W)

    def apply(self, v) -> np.ndarray:
        if self.mode == MODE_NONSYM:
            return apply_nonsym(self.factors, v, self.backend)
        if self.mode == MODE_SYM:
            return apply_sym(self.factors, v, self.backend)
        return apply_sqrt_inv_w(self.factors, v, self.backend)

    __call__ = apply


def _dense_update(f, q, diag):
    d = f.dim
    return np.eye(d) + (q * np.expm1(diag)) @ q.T


def dense_operator(f: ScatterFactorization, mode: str,
                   oracle_cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Materialize an exponential operator densely, for oracles only.

    mode is one of "exp_sb", "exp_neg_sw", "sqrt_exp_neg_sw",
    "nonsymmetric" (the product exp(-s_w) exp(s_b)) or "symmetric" (m).
    """
    check_oracle_scale(f.dim, oracle_cap, "dense_operator")
    if mode == "exp_sb":
        return _dense_update(f, f.q_b, f.d_b)
    if mode == "exp_neg_sw":
        return _dense_update(f, f.q_w, -f.d_w)
    if mode == "sqrt_exp_neg_sw":
        return _dense_update(f, f.q_w, -0.5 * f.d_w)
    if mode == MODE_NONSYM:
        return _dense_update(f, f.q_w, -f.d_w) @ _dense_update(f, f.q_b, f.d_b)
    if mode == MODE_SYM:
        half = _dense_update(f, f.q_w, -0.5 * f.d_w)
        m = half @ _dense_update(f, f.q_b, f.d_b) @ half
        return 0.5 * (m + m.T)
    raise ValueError(f"unknown dense operator mode {mode!r}")
