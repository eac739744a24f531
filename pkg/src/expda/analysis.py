"""Numeric verification of the spectral theory behind the pipelines.

Everything here checks computable inequalities: the eigenvalue sandwich for
the symmetric operator, the criterion bounds, the guaranteed count of unit
eigenvalues, and the subspace-angle perturbation bound that justifies
solving the eigenproblems inexactly.

The full spectrum of the symmetric operator m is obtained at any dimension
without dense work: m acts as the identity on the orthogonal complement of
span{q_b, q_w}, so its nontrivial eigenvalues live in an at most (n + k)-
dimensional subspace; the compressed spectrum there is computed exactly and
padded with ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densela import sym_eig
from .exceptions import DimensionError, ExpdaError
from .expops import ScatterFactorization, apply_sym, preprocess
from .scatter import ScatterPair

#: |lambda - 1| threshold for counting unit eigenvalues.
DEFAULT_UNIT_TOL = 1e-8

#: nu_d must exceed this times nu_1 for the LDA criterion bound to apply.
LDA_BOUND_GATE_RTOL = 1e-10


@dataclass(frozen=True)
class SpectrumSummary:
    """Aligned descending spectra of s_w, s_b, and the symmetric operator m."""

    nu: np.ndarray        # eigenvalues of s_w
    mu: np.ndarray        # eigenvalues of s_b
    lambda_m: np.ndarray  # eigenvalues of m

    @property
    def dim(self) -> int:
        return self.nu.size


@dataclass(frozen=True)
class SubspaceAngle:
    """Sine and cosine of the largest principal angle between two subspaces."""

    sin_angle: float
    cos_angle: float


def _pad_descending(values: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(d)
    out[:values.size] = values
    return out


def _orth_span(cols: np.ndarray) -> np.ndarray:
    u, sigma, _ = np.linalg.svd(cols, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.empty((cols.shape[0], 0))
    return u[:, sigma > 1e-12 * sigma[0]]


def spectrum_summary(sp: ScatterPair,
                     factors: ScatterFactorization | None = None,
                     backend: str = "auto") -> SpectrumSummary:
    """All three spectra, at any dimension.

    nu and mu come from the factorization spectra padded with zeros; the
    spectrum of m is the compressed spectrum on span{q_b, q_w} padded with
    ones (exact, not an approximation).
    """
    f = preprocess(sp) if factors is None else factors
    d = f.dim
    nu = _pad_descending(f.d_w, d)
    mu = _pad_descending(f.d_b, d)
    z = _orth_span(np.hstack([f.q_b, f.q_w]))
    if z.shape[1]:
        mz = z.T @ np.column_stack(
            [apply_sym(f, z[:, j], backend) for j in range(z.shape[1])])
        compressed = np.linalg.eigvalsh(0.5 * (mz + mz.T))
    else:
        compressed = np.empty(0)
    lam = np.concatenate([compressed, np.ones(d - z.shape[1])])
    lam.sort()
    return SpectrumSummary(nu, mu, lam[::-1].copy())


def eig_bounds(s: SpectrumSummary, i: int) -> tuple[float, float]:
    """Two-sided bound on the i-th (1-indexed, descending) eigenvalue of m."""
    d = s.dim
    if not 1 <= i <= d:
        raise IndexError(f"i must be in 1..{d}, got {i}")
    nu, mu = s.nu, s.mu
    lower = max(np.exp(mu[i - 1] - nu[0]), np.exp(mu[d - 1] - nu[d - i]))
    upper = min(np.exp(mu[i - 1] - nu[d - 1]), np.exp(mu[0] - nu[d - i]))
    return float(lower), float(upper)


def criterion_bounds(s: SpectrumSummary, t: int, which: str = "eda") -> tuple[float, float]:
    """Two-sided bound on the optimal criterion value over t-dimensional bases.

    The "lda" variant requires a nonsingular within-class scatter
    (nu_d > 0); otherwise it raises with the gate condition in the message.
    """
    d = s.dim
    if not 1 <= t <= d:
        raise IndexError(f"t must be in 1..{d}, got {t}")
    nu, mu = s.nu, s.mu
    idx = np.arange(1, t + 1)
    if which == "eda":
        lower = np.maximum(np.exp(mu[d - t + idx - 1] - nu[0]),
                           np.exp(mu[d - 1] - nu[t - idx]))
        upper = np.minimum(np.exp(mu[idx - 1] - nu[d - 1]),
                           np.exp(mu[0] - nu[d - idx]))
    elif which == "lda":
        if nu[d - 1] <= LDA_BOUND_GATE_RTOL * max(nu[0], 1e-300):
            raise ExpdaError(
                "LDA criterion bound requires nonsingular s_w "
                f"(nu_d = {nu[d - 1]:.3e} fails the gate)")
        lower = np.maximum(mu[d - t + idx - 1] / nu[0], mu[d - 1] / nu[t - idx])
        upper = np.minimum(mu[idx - 1] / nu[d - 1], mu[0] / nu[d - idx])
    else:
        raise ValueError(f"which must be 'eda' or 'lda', got {which!r}")
    return float(lower.sum()), float(upper.sum())


def eda_optimum(s: SpectrumSummary, t: int) -> float:
    """Optimal EDA criterion value: the sum of the t dominant eigenvalues of m."""
    if not 1 <= t <= s.dim:
        raise IndexError(f"t must be in 1..{s.dim}, got {t}")
    return float(np.sum(s.lambda_m[:t]))


def lda_optimum(s_w: np.ndarray, s_b: np.ndarray, t: int) -> float:
    """Optimal LDA criterion value for nonsingular s_w (dense, oracle scale)."""
    import scipy.linalg

    values = scipy.linalg.eigh(s_b, s_w, eigvals_only=True)
    return float(np.sum(values[::-1][:t]))


def count_unit_eigs(s: SpectrumSummary, tol_eq: float = DEFAULT_UNIT_TOL) -> int:
    """Number of eigenvalues of m equal to 1 within tol_eq."""
    return int(np.sum(np.abs(s.lambda_m - 1.0) <= tol_eq))


def _basis_of(v) -> np.ndarray:
    basis = getattr(v, "v", v)
    return np.asarray(basis, dtype=float)


def subspace_angle(v, v_tilde) -> SubspaceAngle:
    """Largest principal angle between two equally-sized orthonormal bases.

    sin is ||(I - V V^T) Vt||_2 and cos is ||V^T Vt||_2, computed from
    skinny factors only.
    """
    a = _basis_of(v)
    b = _basis_of(v_tilde)
    if a.shape != b.shape:
        raise DimensionError(f"subspace shapes differ: {a.shape} vs {b.shape}")
    cross = a.T @ b
    cos = float(np.linalg.norm(cross, 2))
    sin = float(np.linalg.norm(b - a @ cross, 2))
    return SubspaceAngle(min(sin, 1.0), min(cos, 1.0))


def distance_bound_check(d_exact: float, d_tilde: float, ang: SubspaceAngle,
                         rtol: float = 1e-12) -> bool:
    """Check the projected-distance perturbation sandwich for one pair.

    Requires cos > 0 and unit-normalized underlying samples. ``rtol`` absorbs
    floating-point error in the equality case sin = 0.
    """
    if ang.cos_angle == 0.0:
        raise ExpdaError("distance bound is inapplicable when cos angle = 0")
    slack = rtol * max(1.0, d_exact, d_tilde)
    lower = (d_tilde - 2.0 * ang.sin_angle) / ang.cos_angle
    upper = d_tilde * ang.cos_angle + 2.0 * ang.sin_angle
    return lower - slack <= d_exact <= upper + slack
