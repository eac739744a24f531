"""Restarted Krylov eigensolvers for the dominant spectrum of a matvec operator.

One code path serves both branches: Arnoldi on the nonsymmetric product
operator and Lanczos on the symmetric one. The decomposition maintained is

    A V_m = V_m H_m + v_{m+1} b^T,

where ``b`` is the last row of the stored (m+1) x m projected matrix. For a
fresh expansion H_m is upper Hessenberg (tridiagonal up to round-off in the
symmetric case); after a thick restart it is a compressed block bordered by
the bridge row ``b``. Expansion uses full reorthogonalization (two passes),
so the basis stays orthonormal to working precision at the cost of one extra
gemv pair per step; operator applications dominate anyway.

Restarting keeps the converged and wanted Ritz directions (plus padding),
compresses the decomposition onto them exactly, and continues. Breakdown
(invariant subspace found) harvests every exact pair in the subspace,
deflates it, and restarts from a fresh random vector orthogonal to
everything found so far.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DimensionError

#: Expansion stops when the next residual norm falls below this, relative to
#: the norm of the operator application: an invariant subspace was found.
BREAKDOWN_RTOL = 1e-14

#: Ritz values with |imag| above this times |value| are rejected from the
#: dominant set (the target spectra are real; complex pairs are round-off
#: artifacts or unwanted).
COMPLEX_REJECT_RTOL = 1e-8

DEFAULT_MAX_RESTARTS = 300


def default_max_basis(t: int) -> int:
    return max(2 * t + 10, 40)


@dataclass(frozen=True)
class KrylovDecomposition:
    """Orthonormal basis and projected matrix of a Krylov-type decomposition.

    ``basis`` is d x (m+1) and ``h`` is (m+1) x m with the residual coupling
    in its last row. After breakdown the flagged decomposition has exactly m
    basis columns and a zero last row: the subspace is invariant.
    """

    basis: np.ndarray
    h: np.ndarray
    m: int
    symmetric: bool = False
    breakdown: bool = False


@dataclass(frozen=True)
class RitzPair:
    """Approximate eigenpair extracted from a Krylov decomposition."""

    value: float | complex
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class MatvecOperator:
    """Adapter giving any matrix or matvec callable the operator interface."""

    dim: int
    matvec: object
    symmetric: bool = False

    @classmethod
    def from_matrix(cls, a, symmetric: bool | None = None) -> "MatvecOperator":
        a = np.asarray(a, dtype=float)
        if symmetric is None:
            symmetric = bool(np.allclose(a, a.T))
        return cls(a.shape[0], lambda v, _a=a: _a @ v, symmetric)

    def apply(self, v) -> np.ndarray:
        return self.matvec(v)

    __call__ = apply


def start(v1, symmetric: bool = False) -> KrylovDecomposition:
    """Zero-step decomposition holding only the normalized start vector."""
    v1 = np.asarray(v1, dtype=float)
    norm = np.linalg.norm(v1)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("start vector must be nonzero and finite")
    basis = np.asfortranarray((v1 / norm)[:, None])
    return KrylovDecomposition(basis, np.zeros((1, 0)), 0, symmetric, False)


def expand(op, state: KrylovDecomposition, steps: int,
           lock_basis: np.ndarray | None = None) -> KrylovDecomposition:
    """Grow the decomposition by up to ``steps`` operator applications.

    Stops early (flagged) on breakdown. ``lock_basis`` columns, if given,
    are deflated: every new direction is orthogonalized against them too.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if state.breakdown:
        return state
    d = state.basis.shape[0]
    op_dim = getattr(op, "dim", d)
    if op_dim != d:
        raise DimensionError(f"operator dimension {op_dim} != basis dimension {d}")
    lock = None
    n_lock = 0
    if lock_basis is not None and lock_basis.size:
        lock = lock_basis
        n_lock = lock.shape[1]

    m0 = state.m
    target = m0 + steps
    basis = np.empty((d, target + 1), order="F")
    basis[:, :m0 + 1] = state.basis
    h = np.zeros((target + 1, target))
    h[:m0 + 1, :m0] = state.h

    m = m0
    broke = False
    while m < target:
        w = np.asarray(op.apply(basis[:, m]), dtype=float)
        if w.shape != (d,):
            raise DimensionError(f"operator returned shape {w.shape}, expected ({d},)")
        wnorm0 = np.linalg.norm(w)
        b = basis[:, :m + 1]
        # two-pass classical Gram-Schmidt against basis and locked directions
        coef = b.T @ w
        w = w - b @ coef
        if lock is not None:
            w -= lock @ (lock.T @ w)
        second = b.T @ w
        w -= b @ second
        if lock is not None:
            w -= lock @ (lock.T @ w)
        coef += second
        h[:m + 1, m] = coef
        hnew = np.linalg.norm(w)
        if hnew <= BREAKDOWN_RTOL * max(1.0, wnorm0) or m + 1 + n_lock >= d:
            m += 1
            broke = True
            break
        h[m + 1, m] = hnew
        basis[:, m + 1] = w / hnew
        m += 1

    cols = m if broke else m + 1
    return KrylovDecomposition(
        np.asfortranarray(basis[:, :cols]), h[:m + 1, :m].copy(),
        m, state.symmetric, broke,
    )


def _eig_sorted(h_square: np.ndarray, symmetric: bool):
    """Eigenpairs of the projected matrix, sorted by descending modulus."""
    if symmetric:
        w, y = np.linalg.eigh(0.5 * (h_square + h_square.T))
    else:
        w, y = np.linalg.eig(h_square)
    order = np.argsort(-np.abs(w), kind="stable")
    return w[order], y[:, order]


def _is_real(value) -> bool:
    return abs(np.imag(value)) <= COMPLEX_REJECT_RTOL * max(abs(value), 1e-300)


def ritz_extract(state: KrylovDecomposition, t: int) -> list[RitzPair]:
    """The t dominant Ritz pairs of the decomposition, residuals included.

    The residual of each pair is |b^T y|, which for a fresh decomposition is
    the classical |h_{m+1,m}| |e_m^T y| identity.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return []
    if state.m < t:
        raise DimensionError(f"decomposition has m={state.m} < t={t}")
    m = state.m
    w, y = _eig_sorted(state.h[:m, :m], state.symmetric)
    bridge = state.h[m, :m]
    v = state.basis[:, :m]
    pairs = []
    for i in range(t):
        yi = y[:, i]
        residual = float(abs(bridge @ yi))
        if _is_real(w[i]):
            value = float(np.real(w[i]))
            yi = np.real(yi) if np.iscomplexobj(yi) else yi
        else:
            value = complex(w[i])
        x = v @ yi
        x = x / np.linalg.norm(x)
        pairs.append(RitzPair(value, x, residual))
    return pairs


def _orth_columns(cols: np.ndarray, against: np.ndarray | None = None,
                  drop_tol: float = 1e-10) -> np.ndarray:
    """Order-preserving MGS orthonormalization, dropping dependent columns."""
    kept = []
    for j in range(cols.shape[1]):
        v = cols[:, j].copy()
        orig = np.linalg.norm(v)
        if orig == 0.0:
            continue
        for _ in range(2):
            if against is not None and against.size:
                v -= against @ (against.T @ v)
            for u in kept:
                v -= (u @ v) * u
        norm = np.linalg.norm(v)
        if norm > drop_tol * orig:
            kept.append(v / norm)
    if not kept:
        return np.empty((cols.shape[0], 0))
    return np.asfortranarray(np.column_stack(kept))


def _compress(state: KrylovDecomposition, keep: int) -> KrylovDecomposition:
    """Thick restart: retain the ``keep`` dominant Ritz directions exactly.

    The span of selected eigenvectors of H is H-invariant, so projecting the
    decomposition onto it (plus the residual vector) preserves the Krylov
    relation. Complex-conjugate pairs are kept whole via their real spans.
    """
    m = state.m
    h_square = state.h[:m, :m]
    w, y = _eig_sorted(h_square, state.symmetric)
    if state.symmetric:
        z = np.real(y[:, :keep])
        s_block = np.diag(np.real(w[:keep]))
    else:
        cols = []
        used = set()
        for i in range(m):
            if len(cols) >= keep:
                break
            if i in used:
                continue
            used.add(i)
            if _is_real(w[i]):
                cols.append(np.real(y[:, i]))
            else:
                # locate and consume the conjugate partner
                partner = None
                for j in range(i + 1, m):
                    if j not in used and np.isclose(w[j], np.conj(w[i])):
                        partner = j
                        break
                if partner is not None:
                    used.add(partner)
                cols.append(np.real(y[:, i]))
                cols.append(np.imag(y[:, i]))
        z = _orth_columns(np.column_stack(cols))
        s_block = z.T @ (h_square @ z)
    p = z.shape[1]
    bridge = state.h[m, :m] @ z
    basis = np.empty((state.basis.shape[0], p + 1), order="F")
    basis[:, :p] = state.basis[:, :m] @ z
    basis[:, p] = state.basis[:, m]
    h = np.zeros((p + 1, p))
    h[:p, :p] = s_block
    h[p, :] = bridge
    return KrylovDecomposition(basis, h, p, state.symmetric, False)


def _fresh_start(rng, d: int, lock: np.ndarray, symmetric: bool) -> KrylovDecomposition:
    for _ in range(20):
        v = rng.standard_normal(d)
        if lock.size:
            v -= lock @ (lock.T @ v)
            v -= lock @ (lock.T @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-8 * np.sqrt(d):
            return start(v / norm, symmetric)
    raise ConvergenceError("could not draw a start vector outside the locked subspace")


def solve_dominant(op, t: int, tol: float,
                   max_basis: int | None = None,
                   max_restarts: int = DEFAULT_MAX_RESTARTS,
                   seed=0,
                   symmetric: bool | None = None) -> list[RitzPair]:
    """The t dominant eigenpairs of ``op``, each to residual tol * max(1, |value|).

    Runs restarted Arnoldi (or Lanczos when the operator is symmetric) with
    thick restarts and deflation of converged invariant subspaces. Complex
    Ritz values are rejected from the dominant set; converged pairs are
    verified with one true matvec residual before being returned. The whole
    run is deterministic for a fixed seed.

    Raises ConvergenceError (carrying the best pairs so far) if the target
    accuracy is not reached within ``max_restarts`` restart cycles.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return []
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    d = op.dim
    if t > d:
        raise DimensionError(f"cannot extract t={t} pairs in dimension {d}")
    if symmetric is None:
        symmetric = bool(getattr(op, "symmetric", False))
    if max_basis is None:
        max_basis = default_max_basis(t)
    max_basis = min(max_basis, d)
    if max_basis <= t and max_basis < d:
        raise ValueError(f"max_basis={max_basis} must exceed t={t}")

    rng = np.random.default_rng(seed)
    lock = np.empty((d, 0), order="F")
    found: list[RitzPair] = []
    best: list[RitzPair] = []
    state = _fresh_start(rng, d, lock, symmetric)

    def _top(pairs, count):
        return sorted(pairs, key=lambda p: -abs(p.value))[:count]

    for _ in range(max_restarts):
        needed = t - len(found)
        limit = min(max_basis, d - lock.shape[1])
        if state.m < limit and not state.breakdown:
            state = expand(op, state, limit - state.m,
                           lock_basis=lock if lock.size else None)
        m = state.m
        w, y = _eig_sorted(state.h[:m, :m], state.symmetric)
        bridge = state.h[m, :m]
        v = state.basis[:, :m]

        real_idx = [i for i in range(m) if _is_real(w[i])]
        estimates = {i: float(abs(bridge @ y[:, i])) for i in real_idx}

        def _verified_pair(i):
            value = float(np.real(w[i]))
            x = v @ (np.real(y[:, i]) if np.iscomplexobj(y) else y[:, i])
            norm = np.linalg.norm(x)
            if norm == 0.0:
                return None
            x = x / norm
            residual = float(np.linalg.norm(op.apply(x) - value * x))
            if residual <= tol * max(1.0, abs(value)):
                return RitzPair(value, x, residual)
            return None

        wanted = real_idx[:needed]
        best = _top(found + [RitzPair(float(np.real(w[i])), v @ np.real(y[:, i]),
                                      estimates[i]) for i in wanted], t)

        if state.breakdown:
            # every pair in the invariant subspace is exact; harvest and deflate
            for i in real_idx:
                pair = _verified_pair(i)
                if pair is not None:
                    found.append(pair)
            lock = np.asfortranarray(np.hstack([lock, state.basis[:, :m]]))
            if len(found) >= t:
                return _top(found, t)
            if lock.shape[1] >= d:
                raise ConvergenceError(
                    f"only {len(found)} real dominant pairs exist in dimension {d}, "
                    f"{t} requested", _top(found, t))
            state = _fresh_start(rng, d, lock, symmetric)
            continue

        if len(wanted) == needed and all(
                estimates[i] <= tol * max(1.0, abs(np.real(w[i]))) for i in wanted):
            candidates = [_verified_pair(i) for i in wanted]
            if all(pair is not None for pair in candidates):
                return _top(found + candidates, t)

        keep = min(m - 1, max(needed + 5, m // 2))
        if keep < 1:
            state = _fresh_start(rng, d, lock, symmetric)
            continue
        state = _compress(state, keep)

    raise ConvergenceError(
        f"no convergence to tol={tol} within {max_restarts} restarts", best)
