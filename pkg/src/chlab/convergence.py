"""Small-dispersion convergence harness: builds the soliton family that
targets a given peakon and measures the uniform distance as kappa -> 0.

The wave numbers k_i = (1/kappa) sqrt(1 - 2 kappa^2 / c_i) pin the physical
speeds to the target's c_i exactly. The phases fold in two corrections: the
per-index scaling constant ln C_i (sign fixed once by the N = 1 calibration,
see PHASE_SIGN and calibrate_phase_sign) and the interaction phase phi_i/k_i.
With those in place the optimal global shift stays bounded and the sup-norm
distance decays along the kappa sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
from mpmath import mpf

from .limitprofile import branch_index, build_limit_profile, h_coefficients
from .peakon import PeakonSpec, eval_peakon, peakon_state
from .precision import real, working_precision
from .soliton import PhysicalMap, SolitonSpec, hirota_g

# Sign of the ln C_i phase correction, fixed by the N = 1 calibration run
# (scripts/calibrate_phase_sign.py): the +1 variant leaves an O(1) translation
# error that does not shrink with kappa; -1 sends the optimal shift to zero.
PHASE_SIGN = -1

SHIFT_RANGE = mpf(2)
SHIFT_RESOLUTION = mpf("1e-8")
FINAL_DISTANCE_FRACTION = mpf("0.05")


class ConstraintError(ValueError):
    """kappa too large for a target speed (needs c_i > 2 kappa^2)."""


def default_precision_bits(kappa, n: int) -> int:
    """max(256, ceil(8 N ln(1/kappa) / ln 2) + 256) bits."""
    kappa = real(kappa)
    extra = math.ceil(8 * n * float(mpmath.log(1 / kappa)) / math.log(2))
    return max(256, extra + 256)


def scaling_constants(target: PeakonSpec) -> tuple[mpf, ...]:
    """C_i = prod_j lam_j^2 / (2 lam_i^2 prod_{j != i} (lam_i - lam_j)^2)."""
    lam = tuple(2 / ci for ci in target.c)
    prod_all = mpf(1)
    for l in lam:
        prod_all *= l * l
    out = []
    for i, li in enumerate(lam):
        denom = 2 * li * li
        for j, lj in enumerate(lam):
            if j != i:
                denom *= (li - lj) ** 2
        out.append(prod_all / denom)
    return tuple(out)


def build_soliton_for_peakon(target: PeakonSpec, kappa, sign: int = PHASE_SIGN) -> SolitonSpec:
    """Soliton spec whose derived speeds equal the target speeds exactly."""
    kappa = real(kappa)
    if kappa <= 0:
        raise ConstraintError("kappa must be positive")
    for ci in target.c:
        if not ci > 2 * kappa ** 2:
            raise ConstraintError(
                f"kappa={kappa} too large for target speed {ci} (needs c > 2 kappa^2)")
    ks = tuple(mpmath.sqrt(1 - 2 * kappa ** 2 / ci) / kappa for ci in target.c)
    # speeds are increasing in k, so sort jointly to keep k increasing
    order = sorted(range(len(ks)), key=lambda i: ks[i])
    ks = tuple(ks[i] for i in order)
    cs = tuple(target.c[i] for i in order)
    ps = tuple(target.p[i] for i in order)
    consts = scaling_constants(target)
    consts = tuple(consts[i] for i in order)
    y0 = []
    for ki, ci, pi, const in zip(ks, cs, ps, consts):
        phi = mpmath.log((1 + kappa * ki) / (1 - kappa * ki))
        y0.append(kappa * (pi + sign * mpmath.log(const)) + phi / ki)
    return SolitonSpec(kappa, ks, tuple(y0), mpf(0))


def default_grid(target: PeakonSpec, t, points: int = 801, pad=5) -> list[mpf]:
    """Uniform grid over [x_1 - pad, x_N + pad] plus the exact peakon positions."""
    state = peakon_state(target, t)
    lo = state.x[0] - real(pad)
    hi = state.x[-1] + real(pad)
    if points < 2:
        return sorted(set([lo, hi] + list(state.x)))
    step = (hi - lo) / (points - 1)
    grid = [lo + i * step for i in range(points)]
    return sorted(set(grid) | set(state.x))


def _golden_min(f: Callable, lo: mpf, hi: mpf, tol: mpf) -> tuple[mpf, mpf]:
    """Golden-section minimum of f on [lo, hi] to resolution tol."""
    invphi = (mpmath.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def sup_distance(spec: SolitonSpec, target: PeakonSpec, t, grid: Sequence,
                 shift_range: mpf = SHIFT_RANGE,
                 shift_tol: mpf = SHIFT_RESOLUTION) -> tuple[mpf, mpf, mpf, mpf]:
    """(d_raw, d_shift, shift, worst_x): sup over the grid of the soliton vs
    peakon mismatch, raw and after the best global translation of the soliton.
    """
    if len(grid) == 0:
        raise ValueError("empty evaluation grid")
    t = real(t)
    state = peakon_state(target, t)
    upeak = [eval_peakon(state, x) for x in grid]
    pmap = PhysicalMap(spec, t)

    def dist(s):
        worst = mpf(0)
        wx = real(grid[0])
        for x, up in zip(grid, upeak):
            diff = abs(pmap.u_of_x(real(x) + s) - up)
            if diff > worst:
                worst, wx = diff, real(x)
        return worst, wx

    d_raw, worst_x = dist(mpf(0))
    s_best, d_best = _golden_min(lambda s: dist(s)[0], -shift_range, shift_range, shift_tol)
    if d_raw <= d_best:
        return d_raw, d_raw, mpf(0), worst_x
    d_shift, worst_x_s = dist(s_best)
    return d_raw, d_shift, s_best, worst_x_s


@dataclass
class SweepEntry:
    kappa: mpf
    t: mpf
    d_raw: mpf | None = None
    d_shift: mpf | None = None
    shift: mpf | None = None
    worst_x: mpf | None = None
    bits_used: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepConfig:
    kappas: tuple[mpf, ...] = tuple(mpf(2) ** -i for i in range(1, 9))
    times: tuple[mpf, ...] = (mpf(0),)
    grid_points: int = 801
    pad: mpf = mpf(5)
    shift_range: mpf = SHIFT_RANGE
    shift_tol: mpf = SHIFT_RESOLUTION
    precision_bits: Callable[[mpf, int], int] = default_precision_bits

    def __post_init__(self):
        self.kappas = tuple(real(k) for k in self.kappas)
        self.times = tuple(real(t) for t in self.times)
        for a, b in zip(self.kappas, self.kappas[1:]):
            if not a > b:
                raise ValueError("kappa list must be strictly decreasing")


@dataclass
class ConvergenceReport:
    target: PeakonSpec
    entries: list[SweepEntry] = field(default_factory=list)
    decay_slopes: dict = field(default_factory=dict)   # t -> fitted slope
    peak_amplitude: mpf = mpf(0)
    tail_monotone: bool = True
    final_below_threshold: bool = True

    @property
    def ok(self) -> bool:
        return (all(e.ok for e in self.entries)
                and self.tail_monotone and self.final_below_threshold)

    def entries_at(self, t) -> list[SweepEntry]:
        t = real(t)
        return [e for e in self.entries if e.t == t and e.ok]


def _fit_slope(xs: list[mpf], ys: list[mpf]) -> mpf:
    n = len(xs)
    if n < 2:
        return mpf(0)
    mx = sum(xs, mpf(0)) / n
    my = sum(ys, mpf(0)) / n
    num = sum(((x - mx) * (y - my) for x, y in zip(xs, ys)), mpf(0))
    den = sum(((x - mx) ** 2 for x in xs), mpf(0))
    return num / den if den != 0 else mpf(0)


def run_sweep(target: PeakonSpec, config: SweepConfig) -> ConvergenceReport:
    """Run the kappa sweep; per-entry failures are flagged, not fatal.

    The fitted slope of log d_shift vs log kappa (last half of the sweep) is a
    diagnostic only; acceptance binds to tail monotonicity and the final-entry
    threshold relative to the peak amplitude.
    """
    report = ConvergenceReport(target=target)
    if not config.kappas:
        return report
    amp = mpf(0)
    for t in config.times:
        amp = max(amp, max(peakon_state(target, t).m))
    report.peak_amplitude = amp

    for t in config.times:
        for kappa in config.kappas:
            bits = config.precision_bits(kappa, target.n)
            entry = SweepEntry(kappa=kappa, t=t, bits_used=bits)
            try:
                with working_precision(bits):
                    spec = build_soliton_for_peakon(target, kappa)
                    grid = default_grid(target, t, config.grid_points, config.pad)
                    d_raw, d_shift, shift, worst_x = sup_distance(
                        spec, target, t, grid, config.shift_range, config.shift_tol)
                entry.d_raw, entry.d_shift = d_raw, d_shift
                entry.shift, entry.worst_x = shift, worst_x
            except Exception as exc:  # noqa: BLE001 - per-entry flagging
                entry.error = f"{type(exc).__name__}: {exc}"
            report.entries.append(entry)

    for t in config.times:
        ok_entries = report.entries_at(t)
        tail = ok_entries[-3:]
        if len(tail) == 3:
            if not (tail[0].d_shift > tail[1].d_shift > tail[2].d_shift):
                report.tail_monotone = False
        elif len(config.kappas) >= 3:
            report.tail_monotone = False
        if ok_entries:
            final = ok_entries[-1]
            if not final.d_shift <= FINAL_DISTANCE_FRACTION * amp:
                report.final_below_threshold = False
            half = ok_entries[len(ok_entries) // 2:]
            if len(half) >= 2:
                report.decay_slopes[t] = _fit_slope(
                    [mpmath.log(e.kappa) for e in half],
                    [mpmath.log(e.d_shift) for e in half])
        else:
            report.final_below_threshold = False
    return report


@dataclass
class LeadingOrderResult:
    applicable: bool
    branch: int | None = None
    ratio: mpf | None = None
    predicted: mpf | None = None
    observed: mpf | None = None
    reason: str | None = None


def leading_order_diagnostic(target: PeakonSpec, kappa, t, x) -> LeadingOrderResult:
    """Compare g = g1/g2 at (y(x), t) with its predicted leading term
    -(h_n / h_{n-1}) eps^{2n-2}, eps = kappa^2/4, on the branch containing x.
    """
    kappa, t, x = real(kappa), real(t), real(x)
    profile = build_limit_profile(target, t)
    n = branch_index(profile, x)
    if n > target.n:
        return LeadingOrderResult(False, branch=n, reason="rightmost branch has its own asymptotics")
    hs = h_coefficients(profile, x)
    if hs[n - 1] == 0:
        return LeadingOrderResult(False, branch=n, reason="h_{n-1} vanishes at this x")
    eps = kappa ** 2 / 4
    predicted = -hs[n] / hs[n - 1] * eps ** (2 * n - 2)
    if predicted <= 0:
        return LeadingOrderResult(False, branch=n, reason="predicted leading term not positive")
    spec = build_soliton_for_peakon(target, kappa)
    pmap = PhysicalMap(spec, t)
    y = pmap.invert(x)
    log_g1, log_g2, _, _ = hirota_g(spec, y, t)
    observed = mpmath.exp(log_g1 - log_g2)
    return LeadingOrderResult(True, branch=n, ratio=observed / predicted,
                              predicted=predicted, observed=observed)
