"""Matvec timing: the linear-in-d cost contract and backend comparison.

One operator application costs O((k + n) d); at fixed class structure the
median wall time should therefore scale linearly with the dimension. The
same harness compares the compiled kernel against the numpy fallback.
"""

from __future__ import annotations

import time

import numpy as np

from .backend import available_backends
from .expops import MODE_NONSYM, MODE_SYM, ExponentialOperator, preprocess
from .ingest import SyntheticSpec, make_synthetic
from .scatter import build_scatter

DEFAULT_DIMS = (10_000, 20_000, 40_000)


def median_apply_seconds(factors, mode: str, backend: str = "auto",
                         samples: int = 64, warmup: int = 8, seed=0) -> float:
    """Median wall time of one operator application, in seconds."""
    op = ExponentialOperator(factors, mode, backend)
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((samples + warmup, op.dim))
    times = []
    for i in range(samples + warmup):
        start = time.perf_counter()
        op.apply(vectors[i])
        elapsed = time.perf_counter() - start
        if i >= warmup:
            times.append(elapsed)
    return float(np.median(times))


def scaling_table(dims=DEFAULT_DIMS, n: int = 30, k: int = 6,
                  modes=(MODE_NONSYM, MODE_SYM), backends=None,
                  samples: int = 64, seed: int = 0) -> list[dict]:
    """Median apply times over a grid of dimensions, modes, and backends.

    Fixed n and k isolate the dependence on d. Returns one row per
    (backend, mode, d) with the median seconds per apply.
    """
    if n % k:
        raise ValueError(f"n={n} must be divisible by k={k}")
    if backends is None:
        backends = available_backends()
    rows = []
    for d in dims:
        spec = SyntheticSpec(d=d, k=k, per_class=n // k, noise_scale=0.3,
                             centroid_scale=1.0, seed=seed)
        factors = preprocess(build_scatter(make_synthetic(spec)))
        for backend in backends:
            for mode in modes:
                rows.append({
                    "backend": backend,
                    "mode": mode,
                    "d": int(d),
                    "n": int(n),
                    "k": int(k),
                    "median_seconds": median_apply_seconds(
                        factors, mode, backend, samples=samples, seed=seed),
                })
    return rows


def doubling_ratios(rows: list[dict]) -> list[dict]:
    """Time ratios between consecutive dimensions per (backend, mode)."""
    ratios = []
    groups = {}
    for row in rows:
        groups.setdefault((row["backend"], row["mode"]), []).append(row)
    for (backend, mode), group in sorted(groups.items()):
        group = sorted(group, key=lambda r: r["d"])
        for prev, cur in zip(group, group[1:]):
            ratios.append({
                "backend": backend,
                "mode": mode,
                "d_from": prev["d"],
                "d_to": cur["d"],
                "dim_factor": cur["d"] / prev["d"],
                "time_ratio": cur["median_seconds"] / prev["median_seconds"],
            })
    return ratios
