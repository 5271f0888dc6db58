"""Piecewise small-dispersion limit profile of the smooth N-soliton family.

The profile is defined branch-by-branch between breakpoints that coincide with
the peakon positions. Branch n (over (xbar_{n-1}, xbar_n]) evaluates

    u_n = (e^x D(N-n,3) + 4 e^{-x} D(N-n+2,-1)) / D(N-n+1,1),

and the rightmost branch uses u_{N+1} = 2 sum_i c_i / z_i with
z_i = e^{x - c_i t - p_i}. Equality with the peakon superposition is a
theorem; equivalence_check measures it numerically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mpf

from .hankel import HankelIndex, SpectralData, hankel_det
from .peakon import PeakonSpec, eval_peakon, peakon_state
from .precision import real

EQUIVALENCE_RTOL = mpf("1e-35")


@dataclass(frozen=True)
class LimitProfile:
    spec: PeakonSpec
    t: mpf
    xbar: tuple[mpf, ...]
    data: SpectralData

    @property
    def n(self) -> int:
        return self.spec.n


def build_limit_profile(spec: PeakonSpec, t) -> LimitProfile:
    """Breakpoints xbar_n = ln(2 D(N-n+1,0) / D(N-n,2)), strictly increasing."""
    t = real(t)
    data = spec.spectral_data(t)
    big_n = spec.n
    xbar = []
    for n in range(1, big_n + 1):
        k = big_n - n
        num = hankel_det(data, HankelIndex(k + 1, 0))
        den = hankel_det(data, HankelIndex(k, 2))
        xbar.append(mpmath.log(2 * num / den))
    for a, b in zip(xbar, xbar[1:]):
        if not a < b:
            raise AssertionError("internal consistency: breakpoints not strictly increasing")
    return LimitProfile(spec, t, tuple(xbar), data)


def branch_index(profile: LimitProfile, x) -> int:
    """1-based branch containing x, with half-open intervals (xbar_{n-1}, xbar_n]."""
    x = real(x)
    for n, b in enumerate(profile.xbar, start=1):
        if x <= b:
            return n
    return profile.n + 1


def eval_branch(profile: LimitProfile, n: int, x) -> mpf:
    """Value of branch n at x (regardless of whether x lies inside it)."""
    x = real(x)
    big_n = profile.n
    if n == big_n + 1:
        total = mpf(0)
        for ci, pi in zip(profile.spec.c, profile.spec.p):
            z = mpmath.exp(x - ci * profile.t - pi)
            total += ci / z
        return 2 * total
    k = big_n - n
    d3 = hankel_det(profile.data, HankelIndex(k, 3))
    dm1 = hankel_det(profile.data, HankelIndex(k + 2, -1))
    d1 = hankel_det(profile.data, HankelIndex(k + 1, 1))
    return (mpmath.exp(x) * d3 + 4 * mpmath.exp(-x) * dm1) / d1


def eval_limit(profile: LimitProfile, x) -> mpf:
    return eval_branch(profile, branch_index(profile, x), x)


def h_coefficients(profile: LimitProfile, x) -> list[mpf]:
    """The N+2 branch-selection coefficients h_0 .. h_{N+1} at x.

    h_0 = 1; h_n = d_n e^{(n-1)x} (e^x D(N-n,2) - 2 D(N-n+1,0)) for 1<=n<=N;
    h_{N+1} = -prod(lam)^{2N} e^{Nx} / (2^N Delta_N prod(E)). Sign pattern:
    h_n = 0 iff x = xbar_n, h_n > 0 iff x > xbar_n.
    """
    x = real(x)
    big_n = profile.n
    lam = profile.data.lam
    log_delta_n = mpf(0)
    for a, b in itertools.combinations(range(big_n), 2):
        log_delta_n += 2 * mpmath.log(abs(lam[a] - lam[b]))
    log_prod_e = sum(profile.data.log_e, mpf(0))
    log_prod_lam = sum((mpmath.log(l) for l in lam), mpf(0))

    hs = [mpf(1)]
    for n in range(1, big_n + 1):
        # d_n = prod(lam)^{2(n-1)} / (2^n Delta_N prod(E)), positive
        log_dn = 2 * (n - 1) * log_prod_lam - n * mpmath.log(2) - log_delta_n - log_prod_e
        k = big_n - n
        core = mpmath.exp(x) * hankel_det(profile.data, HankelIndex(k, 2)) \
            - 2 * hankel_det(profile.data, HankelIndex(k + 1, 0))
        hs.append(mpmath.exp(log_dn + (n - 1) * x) * core)
    log_tail = 2 * big_n * log_prod_lam + big_n * x - big_n * mpmath.log(2) \
        - log_delta_n - log_prod_e
    hs.append(-mpmath.exp(log_tail))
    return hs


@dataclass
class EquivalenceReport:
    max_abs_diff: mpf
    max_rel_diff: mpf
    peak_amplitude: mpf
    worst_x: mpf
    threshold: mpf = EQUIVALENCE_RTOL
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def equivalence_check(spec: PeakonSpec, t, grid: Sequence,
                      threshold: mpf = EQUIVALENCE_RTOL) -> EquivalenceReport:
    """Max |limit profile - peakon superposition| over the grid, relative to
    the largest peakon amplitude."""
    if len(grid) == 0:
        raise ValueError("empty evaluation grid")
    profile = build_limit_profile(spec, t)
    state = peakon_state(spec, t)
    amp = max(state.m)
    worst = mpf(0)
    worst_x = real(grid[0])
    for x in grid:
        x = real(x)
        diff = abs(eval_limit(profile, x) - eval_peakon(state, x))
        if diff > worst:
            worst, worst_x = diff, x
    rep = EquivalenceReport(worst, worst / amp, amp, worst_x, threshold=threshold)
    if rep.max_rel_diff > threshold:
        rep.violations.append(("limit_vs_peakon", worst_x, rep.max_rel_diff))
    return rep
