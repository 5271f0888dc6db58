"""Spectral moments, Hankel determinants and the determinant-identity suite.

The moments are A_m = sum_i lambda_i^m E_i with distinct positive rates
lambda_i and positive weights E_i. The order-n Hankel determinant
D(n, m) = det(A_{m+i+j})_{i,j=0..n-1} admits a subset expansion in which every
summand is positive, so it is evaluated without cancellation; the explicit
matrix determinant is kept as an independent oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mpf

from .precision import det_dense, minor, real

# Relative residual allowed for the determinant identities at 256 bits.
IDENTITY_RTOL = mpf("1e-40")


class SpectralDataError(ValueError):
    """Invalid rates or weights."""


class IdentityViolation(AssertionError):
    """An identity residual exceeded its threshold."""


@dataclass(frozen=True)
class SpectralData:
    """Distinct positive rates and positive weights (weights stored as logs)."""

    lam: tuple[mpf, ...]
    log_e: tuple[mpf, ...]

    def __post_init__(self):
        lam = tuple(real(x) for x in self.lam)
        log_e = tuple(real(x) for x in self.log_e)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "log_e", log_e)
        if len(lam) != len(log_e):
            raise SpectralDataError("rate and weight lists must have equal length")
        if len(lam) == 0:
            raise SpectralDataError("need at least one rate")
        if any(l <= 0 for l in lam):
            raise SpectralDataError("rates must be strictly positive")
        if len(set(lam)) != len(lam):
            raise SpectralDataError("rates must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def e(self) -> tuple[mpf, ...]:
        return tuple(mpmath.exp(le) for le in self.log_e)

    def advanced(self, dt) -> "SpectralData":
        """Weights advanced in time: log E_i += (2/lambda_i) dt."""
        dt = real(dt)
        return SpectralData(self.lam, tuple(le + 2 / l * dt for l, le in zip(self.lam, self.log_e)))


@dataclass(frozen=True)
class HankelIndex:
    n: int
    m: int


def moment(data: SpectralData, m: int) -> mpf:
    """A_m = sum_i lambda_i^m E_i > 0 (negative m allowed; rates are positive)."""
    return sum((l ** m * e for l, e in zip(data.lam, data.e)), mpf(0))


def hankel_matrix(data: SpectralData, n: int, m: int) -> list[list[mpf]]:
    """The n x n matrix (A_{m+i+j})_{i,j=0..n-1}."""
    mom = [moment(data, m + k) for k in range(2 * n - 1)]
    return [[mom[i + j] for j in range(n)] for i in range(n)]


def _pair_discriminant(lam: Sequence[mpf], subset: tuple[int, ...]) -> mpf:
    prod = mpf(1)
    for a, b in itertools.combinations(subset, 2):
        d = lam[a] - lam[b]
        prod *= d * d
    return prod


def _subset_terms(data: SpectralData, n: int):
    """Yield (subset, discriminant * prod E, prod lambda) over all n-subsets."""
    e = data.e
    for subset in itertools.combinations(range(data.n), n):
        disc = _pair_discriminant(data.lam, subset)
        pe = mpf(1)
        pl = mpf(1)
        for i in subset:
            pe *= e[i]
            pl *= data.lam[i]
        yield subset, disc * pe, pl


def hankel_det(data: SpectralData, idx: HankelIndex) -> mpf:
    """D(n, m) by the positive subset expansion (no cancellation).

    Conventions: D(0, m) = 1; D(n, m) = 0 for n < 0 or n > N.
    """
    n, m = idx.n, idx.m
    if n == 0:
        return mpf(1)
    if n < 0 or n > data.n:
        return mpf(0)
    total = mpf(0)
    for _, coeff, pl in _subset_terms(data, n):
        total += coeff * pl ** m
    return total


def hankel_det_naive(data: SpectralData, idx: HankelIndex) -> mpf:
    """Oracle route: explicit Hankel matrix + dense determinant."""
    n, m = idx.n, idx.m
    if n == 0:
        return mpf(1)
    if n < 0:
        return mpf(0)
    return det_dense(hankel_matrix(data, n, m))


def hankel_det_time_deriv(data: SpectralData, idx: HankelIndex) -> mpf:
    """d/dt D(n, m), using d/dt E_i = (2/lambda_i) E_i (so A_{m,t} = 2 A_{m-1}).

    Each subset term of the expansion picks up the factor sum_{i in subset} 2/lambda_i.
    """
    n, m = idx.n, idx.m
    if n <= 0 or n > data.n:
        return mpf(0)
    total = mpf(0)
    for subset, coeff, pl in _subset_terms(data, n):
        rate = sum((2 / data.lam[i] for i in subset), mpf(0))
        total += coeff * pl ** m * rate
    return total


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

@dataclass
class IdentityReport:
    residuals: dict = field(default_factory=dict)   # name -> max residual
    worst: dict = field(default_factory=dict)       # name -> (n, m)
    violations: list = field(default_factory=list)  # (name, n, m, residual)
    threshold: mpf = IDENTITY_RTOL

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_residual(self) -> mpf:
        return max(self.residuals.values(), default=mpf(0))


class _DetCache:
    def __init__(self, data: SpectralData):
        self.data = data
        self._d: dict[tuple[int, int], mpf] = {}
        self._dt: dict[tuple[int, int], mpf] = {}

    def d(self, n: int, m: int) -> mpf:
        key = (n, m)
        if key not in self._d:
            self._d[key] = hankel_det(self.data, HankelIndex(n, m))
        return self._d[key]

    def dt(self, n: int, m: int) -> mpf:
        key = (n, m)
        if key not in self._dt:
            self._dt[key] = hankel_det_time_deriv(self.data, HankelIndex(n, m))
        return self._dt[key]

    def minor_1_2(self, n: int, m: int) -> mpf:
        """Minor of the n x n Hankel matrix with row 1 and column 2 deleted."""
        if n > self.data.n + 1:
            # rank N matrix: any minor of order > N vanishes identically
            return mpf(0)
        if n == 1:
            return mpf(1)
        return minor(hankel_matrix(self.data, n, m), [1], [2])


def _residual(lhs_terms: Sequence[mpf], rhs_terms: Sequence[mpf]) -> mpf:
    """|sum lhs - sum rhs| relative to the largest participating term."""
    lhs = sum(lhs_terms, mpf(0))
    rhs = sum(rhs_terms, mpf(0))
    scale = max([abs(t) for t in (*lhs_terms, *rhs_terms)] + [mpf("1e-300")])
    if scale == 0:
        return mpf(0)
    return abs(lhs - rhs) / scale


def identity_suite(data: SpectralData, max_n: int | None = None,
                   m_window: tuple[int, int] = (-2, 3),
                   threshold: mpf = IDENTITY_RTOL) -> IdentityReport:
    """Check the Hankel-determinant identity suite on one spectral datum.

    Covers: the Jacobi-minor recursion in (n, m); the four time-derivative
    bilinear identities; the two telescoping sums; and the Jacobi identity on
    the explicit Hankel matrix. Residuals are relative to the largest
    participating product, so pure cancellation does not inflate them.
    """
    big_n = data.n if max_n is None else min(max_n, data.n)
    c = _DetCache(data)
    rep = IdentityReport(threshold=threshold)

    def record(name: str, n: int, m: int, res: mpf):
        if name not in rep.residuals or res > rep.residuals[name]:
            rep.residuals[name] = res
            rep.worst[name] = (n, m)
        if res > threshold:
            rep.violations.append((name, n, m, res))

    m_lo, m_hi = m_window

    # D(n+2,m) D(n,m+2) = D(n+1,m+2) D(n+1,m) - D(n+1,m+1)^2
    for n in range(0, big_n + 1):
        for m in range(m_lo, m_hi + 1):
            res = _residual(
                [c.d(n + 2, m) * c.d(n, m + 2)],
                [c.d(n + 1, m + 2) * c.d(n + 1, m), -c.d(n + 1, m + 1) ** 2],
            )
            record("hankel_recursion", n, m, res)

    for n in range(0, big_n + 1):
        # D_t(n+1,2) D(n,2) - D_t(n,2) D(n+1,2) = 2 D(n+1,1) D(n,3)
        record("bilinear_t_22", n, 2, _residual(
            [c.dt(n + 1, 2) * c.d(n, 2), -c.dt(n, 2) * c.d(n + 1, 2)],
            [2 * c.d(n + 1, 1) * c.d(n, 3)],
        ))
        # D_t(n+2,0) D(n+1,0) - D_t(n+1,0) D(n+2,0) = 2 D(n+2,-1) D(n+1,1)
        record("bilinear_t_00", n, 0, _residual(
            [c.dt(n + 2, 0) * c.d(n + 1, 0), -c.dt(n + 1, 0) * c.d(n + 2, 0)],
            [2 * c.d(n + 2, -1) * c.d(n + 1, 1)],
        ))
        # D_t(n,2) D(n+2,0) - D_t(n+1,2) D(n+1,0) = -2 M(n+2,-1) D(n+1,1)
        record("bilinear_t_minor_20", n, 2, _residual(
            [c.dt(n, 2) * c.d(n + 2, 0), -c.dt(n + 1, 2) * c.d(n + 1, 0)],
            [-2 * c.minor_1_2(n + 2, -1) * c.d(n + 1, 1)],
        ))
        # D_t(n+1,0) D(n+1,2) - D_t(n+2,0) D(n,2) = 2 M(n+2,-1) D(n+1,1)
        record("bilinear_t_minor_02", n, 0, _residual(
            [c.dt(n + 1, 0) * c.d(n + 1, 2), -c.dt(n + 2, 0) * c.d(n, 2)],
            [2 * c.minor_1_2(n + 2, -1) * c.d(n + 1, 1)],
        ))

    # telescoping sums
    for n in range(0, big_n):
        lhs = [c.d(i, 2) ** 2 / (c.d(i + 1, 1) * c.d(i, 1)) for i in range(0, n + 1)]
        record("telescope_sum_3", n, 2, _residual(lhs, [c.d(n, 3) / c.d(n + 1, 1)]))
    for n in range(-1, big_n - 1):
        lhs = [c.d(i + 1, 0) ** 2 / (c.d(i + 1, 1) * c.d(i, 1)) for i in range(n + 1, data.n)]
        rhs = [c.d(n + 2, -1) / c.d(n + 1, 1)]
        record("telescope_sum_neg1", n, 0, _residual(lhs if lhs else [mpf(0)], rhs))

    # Jacobi identity on the explicit Hankel matrix: D * D(1,n;1,n) =
    # D(1;1) D(n;n) - D(n;1) D(1;n)
    for n in range(2, big_n + 1):
        for m in range(m_lo, m_hi + 1):
            mat = hankel_matrix(data, n, m)
            d = det_dense(mat)
            res = _residual(
                [d * minor(mat, [1, n], [1, n])],
                [minor(mat, [1], [1]) * minor(mat, [n], [n]),
                 -minor(mat, [n], [1]) * minor(mat, [1], [n])],
            )
            record("jacobi_identity", n, m, res)

    return rep
