"""N-peakon state of the dispersionless Camassa-Holm equation.

Amplitudes and positions come from ratios of Hankel determinants built on
lambda_i = 2/c_i and E_i = e^{c_i t + p_i}. The determinant form used here is
the 4^{...}-rescaled one; the raw tilde-moment transcription is kept only as a
documented negative oracle (see tilde_form_single_amplitude).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mpf

from .hankel import HankelIndex, SpectralData, hankel_det
from .precision import real

CONSERVATION_RTOL = mpf("1e-35")


class PeakonSpecError(ValueError):
    """Invalid peakon parameters."""


@dataclass(frozen=True)
class PeakonSpec:
    """Asymptotic speeds c_i (distinct, positive) and phases p_i."""

    c: tuple[mpf, ...]
    p: tuple[mpf, ...]

    def __post_init__(self):
        c = tuple(real(x) for x in self.c)
        p = tuple(real(x) for x in self.p)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)
        if len(c) != len(p):
            raise PeakonSpecError("speed and phase lists must have equal length")
        if len(c) == 0:
            raise PeakonSpecError("need at least one peakon")
        if any(ci <= 0 for ci in c):
            raise PeakonSpecError("speeds must be strictly positive")
        if len(set(c)) != len(c):
            raise PeakonSpecError("speeds must be pairwise distinct (determinants degenerate otherwise)")

    @property
    def n(self) -> int:
        return len(self.c)

    def spectral_data(self, t) -> SpectralData:
        """lambda_i = 2/c_i, log E_i = c_i t + p_i."""
        t = real(t)
        return SpectralData(
            tuple(2 / ci for ci in self.c),
            tuple(ci * t + pi for ci, pi in zip(self.c, self.p)),
        )


@dataclass(frozen=True)
class PeakonState:
    t: mpf
    m: tuple[mpf, ...]
    x: tuple[mpf, ...]

    @property
    def n(self) -> int:
        return len(self.m)


def peakon_state(spec: PeakonSpec, t) -> PeakonState:
    """Amplitudes m_i and positions x_i at time t.

    m_i = 2 D(N-i+1,0) D(N-i,2) / (D(N-i+1,1) D(N-i,1)),
    x_i = ln(2 D(N-i+1,0) / D(N-i,2)); positions come out strictly increasing.
    """
    t = real(t)
    data = spec.spectral_data(t)
    big_n = spec.n

    def d(n, m):
        return hankel_det(data, HankelIndex(n, m))

    ms = []
    xs = []
    for i in range(1, big_n + 1):
        k = big_n - i
        ms.append(2 * d(k + 1, 0) * d(k, 2) / (d(k + 1, 1) * d(k, 1)))
        xs.append(mpmath.log(2 * d(k + 1, 0) / d(k, 2)))
    state = PeakonState(t, tuple(ms), tuple(xs))
    for a, b in zip(state.x, state.x[1:]):
        if not a < b:
            raise AssertionError("internal consistency: positions not strictly increasing")
    return state


def eval_peakon(state: PeakonState, x) -> mpf:
    """u(x) = sum_i m_i e^{-|x - x_i|}."""
    x = real(x)
    return sum((mi * mpmath.exp(-abs(x - xi)) for mi, xi in zip(state.m, state.x)), mpf(0))


def peakon_energy(state: PeakonState) -> mpf:
    """H = 1/2 sum_{i,j} m_i m_j e^{-|x_i - x_j|}."""
    total = mpf(0)
    for mi, xi in zip(state.m, state.x):
        for mj, xj in zip(state.m, state.x):
            total += mi * mj * mpmath.exp(-abs(xi - xj))
    return total / 2


@dataclass
class ConservationReport:
    times: tuple[mpf, ...]
    momentum: tuple[mpf, ...]
    energy: tuple[mpf, ...]
    momentum_drift: mpf = mpf(0)
    energy_drift: mpf = mpf(0)
    threshold: mpf = CONSERVATION_RTOL
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def conserved_diagnostics(spec: PeakonSpec, times: Sequence,
                          threshold: mpf = CONSERVATION_RTOL) -> ConservationReport:
    """Momentum sum(m_i) and energy H across times; both must stay constant."""
    if len(times) < 2:
        raise PeakonSpecError("need at least two times for a drift diagnostic")
    moms = []
    ens = []
    ts = tuple(real(t) for t in times)
    for t in ts:
        st = peakon_state(spec, t)
        moms.append(sum(st.m, mpf(0)))
        ens.append(peakon_energy(st))
    rep = ConservationReport(ts, tuple(moms), tuple(ens), threshold=threshold)

    def drift(vals):
        lo, hi = min(vals), max(vals)
        return (hi - lo) / abs(hi)

    rep.momentum_drift = drift(moms)
    rep.energy_drift = drift(ens)
    if rep.momentum_drift > threshold:
        rep.violations.append(("momentum", rep.momentum_drift))
    if rep.energy_drift > threshold:
        rep.violations.append(("energy", rep.energy_drift))
    return rep


def tilde_form_single_amplitude(c) -> mpf:
    """Single-peakon amplitude from the raw tilde-moment formula (N = 1).

    Transcribed literally, the tilde form gives 4c instead of the exact
    amplitude c: with eigenvalue lt = -1/(2c) and weight a1 > 0, the amplitude
    ratio reads 2*a1 / ((-lt)*a1) = 4c. The rescaled determinant form used by
    peakon_state absorbs the offending power of 4. Kept as a negative oracle.
    """
    c = real(c)
    lt = -1 / (2 * c)
    a1 = mpf(1)  # arbitrary positive weight; cancels except for the scaling bug
    delta_tilde_1_0 = a1                 # det[ sum (-lt)^0 a ] over i >= 1
    delta_1_1 = (-lt) * a1               # det[ sum (-lt)^1 a ] over i >= 1
    return 2 * delta_tilde_1_0 * mpf(1) / (delta_1_1 * mpf(1))
