"""Seeded random corpora for the verification suites and property tests.

All generators draw from ``random.Random`` so a (seed, size) pair pins the
corpus exactly; values pass through ``repr(float)`` -> mpf, which is lossless.
"""

from __future__ import annotations

import random

from mpmath import mpf

from .hankel import SpectralData
from .peakon import PeakonSpec
from .soliton import SubsetFormSpec


def _distinct_uniform(rng: random.Random, n: int, lo: float, hi: float,
                      min_gap: float = 1e-3) -> list[float]:
    vals: list[float] = []
    while len(vals) < n:
        x = rng.uniform(lo, hi)
        if all(abs(x - v) > min_gap for v in vals):
            vals.append(x)
    return sorted(vals)


def random_spectral_data(rng: random.Random, max_n: int = 6) -> SpectralData:
    n = rng.randint(1, max_n)
    lam = _distinct_uniform(rng, n, 0.2, 5.0)
    log_e = [rng.uniform(-2.0, 2.0) for _ in range(n)]
    return SpectralData(tuple(mpf(x) for x in lam), tuple(mpf(x) for x in log_e))


def random_peakon_spec(rng: random.Random, max_n: int = 6, fixed_n: int | None = None) -> PeakonSpec:
    n = fixed_n if fixed_n is not None else rng.randint(1, max_n)
    c = _distinct_uniform(rng, n, 0.3, 4.0, min_gap=5e-2)
    p = [rng.uniform(-2.0, 2.0) for _ in range(n)]
    return PeakonSpec(tuple(mpf(x) for x in c), tuple(mpf(x) for x in p))


def random_subset_spec(rng: random.Random, max_n: int = 5,
                       fixed_n: int | None = None) -> SubsetFormSpec:
    n = fixed_n if fixed_n is not None else rng.randint(1, max_n)
    kappa = rng.uniform(0.15, 0.45)
    # keep 2*kappa*k_n < 1 with margin
    top = 0.95 / (2 * kappa)
    k = _distinct_uniform(rng, n, 0.05 * top, top)
    return SubsetFormSpec(mpf(kappa), tuple(mpf(x) for x in k))


def random_yt_samples(rng: random.Random, count: int,
                      y_range: float = 8.0, t_range: float = 2.0) -> list[tuple[mpf, mpf]]:
    return [(mpf(rng.uniform(-y_range, y_range)), mpf(rng.uniform(-t_range, t_range)))
            for _ in range(count)]
