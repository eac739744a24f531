"""Kernel backend selection: compiled extension when built, numpy otherwise.

Both backends implement the same low-rank exponential-update matvec

    out = v + q (em1 * (q^T v)),

the two-gemv core of every operator application. The compiled version goes
straight to BLAS and avoids intermediate allocations; the numpy fallback is
functionally identical. ``expda bench --compare-backends`` measures both.
"""

from __future__ import annotations

import numpy as np

try:
    from ._kernels import lowrank_expm_apply as _lowrank_compiled
except ImportError:
    _lowrank_compiled = None


def _lowrank_python(q, em1, v, out, work):
    """Numpy implementation of the low-rank exponential-update matvec."""
    if q.shape[1] == 0:
        np.copyto(out, v)
        return
    np.dot(q.T, v, out=work)
    work *= em1
    np.copyto(out, v)
    out += q @ work


BACKENDS = {"python": _lowrank_python}
if _lowrank_compiled is not None:
    BACKENDS["compiled"] = _lowrank_compiled

#: Backend used when callers ask for "auto".
DEFAULT_BACKEND = "compiled" if _lowrank_compiled is not None else "python"


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def get_kernel(backend: str = "auto"):
    """Resolve a backend name to the kernel callable."""
    if backend == "auto":
        backend = DEFAULT_BACKEND
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(
            f"unknown backend {backend!r}; available: {available_backends()}"
        ) from None
