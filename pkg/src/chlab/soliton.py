"""Smooth N-soliton of the dispersive Camassa-Holm equation.

Three independent representations of the tau-ratio g1/g2 coexist here:

* the 2^N-term exponential-sum form with pairwise interaction phases
  (``hirota_g``), wave numbers constrained by 0 < kappa*k_i < 1;
* the subset-sum form (``subset_g``), wave numbers constrained by
  0 < 2*kappa*k_i < 1, related to the first by k -> 2k plus a fixed
  per-index phase shift (``subset_to_hirota``);
* the Wronskian form built from cosh/sinh columns (``wronskian_forms``),
  tied back to the subset form through an explicit determinant relationship.

The parametric solution is x(y,t) = y/kappa + ln(g1/g2) + alpha and
u = d/dt ln(g1/g2); x is strictly increasing in y, so physical-space
evaluation is a monotone inversion (``PhysicalMap`` / ``eval_physical``).
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .precision import (LogSumAccumulator, det_dense, log_sum_exp, real)

FORM_EQUIVALENCE_RTOL = mpf("1e-38")
SECTION5_RTOL = mpf("1e-35")
DEFAULT_INVERSION_TOL = mpf("1e-30")
MAX_BRACKET_DOUBLINGS = 200


class SolitonSpecError(ValueError):
    """Invalid soliton parameters."""


class InversionError(RuntimeError):
    """Monotone inversion failed to bracket or converge."""


class DegenerateSpecError(ValueError):
    """Vanishing denominator Wronskian."""


def _check_wave_numbers(kappa, k, limit) -> None:
    if kappa <= 0:
        raise SolitonSpecError("dispersion parameter must be positive")
    for a, b in zip(k, k[1:]):
        if not a < b:
            raise SolitonSpecError("wave numbers must be strictly increasing")
    for ki in k:
        if not 0 < limit * kappa * ki < 1:
            raise SolitonSpecError(
                f"wave number {ki} violates 0 < {limit}*kappa*k < 1 at kappa={kappa}")


@dataclass(frozen=True)
class SolitonSpec:
    """Exponential-sum convention: 0 < kappa*k_i < 1, phases y0_i, shift alpha."""

    kappa: mpf
    k: tuple[mpf, ...]
    y0: tuple[mpf, ...]
    alpha: mpf = mpf(0)

    def __post_init__(self):
        object.__setattr__(self, "kappa", real(self.kappa))
        object.__setattr__(self, "k", tuple(real(x) for x in self.k))
        object.__setattr__(self, "y0", tuple(real(x) for x in self.y0))
        object.__setattr__(self, "alpha", real(self.alpha))
        if len(self.k) != len(self.y0):
            raise SolitonSpecError("wave-number and phase lists must have equal length")
        if len(self.k) == 0:
            raise SolitonSpecError("need at least one wave number")
        _check_wave_numbers(self.kappa, self.k, 1)

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def c(self) -> tuple[mpf, ...]:
        """Speeds c_i = 2 kappa^2 / (1 - kappa^2 k_i^2), all > 2 kappa^2."""
        k2 = self.kappa ** 2
        return tuple(2 * k2 / (1 - k2 * ki ** 2) for ki in self.k)

    @property
    def phi(self) -> tuple[mpf, ...]:
        """phi_i = ln((1 + kappa k_i) / (1 - kappa k_i)) > 0."""
        return tuple(mpmath.log((1 + self.kappa * ki) / (1 - self.kappa * ki)) for ki in self.k)

    def xi(self, y, t) -> tuple[mpf, ...]:
        """xi_i = k_i (y - kappa c_i t - y0_i)."""
        y, t = real(y), real(t)
        return tuple(ki * (y - self.kappa * ci * t - y0i)
                     for ki, ci, y0i in zip(self.k, self.c, self.y0))


@dataclass(frozen=True)
class SubsetFormSpec:
    """Subset-sum convention: 0 < 2 kappa k_i < 1, no phases."""

    kappa: mpf
    k: tuple[mpf, ...]

    def __post_init__(self):
        object.__setattr__(self, "kappa", real(self.kappa))
        object.__setattr__(self, "k", tuple(real(x) for x in self.k))
        if len(self.k) == 0:
            raise SolitonSpecError("need at least one wave number")
        _check_wave_numbers(self.kappa, self.k, 2)

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def c(self) -> tuple[mpf, ...]:
        """Speeds 2 kappa^2 / (1 - 4 kappa^2 k_i^2)."""
        k2 = self.kappa ** 2
        return tuple(2 * k2 / (1 - 4 * k2 * ki ** 2) for ki in self.k)

    @property
    def a(self) -> tuple[mpf, ...]:
        return tuple((1 + 2 * self.kappa * ki) / (1 - 2 * self.kappa * ki) for ki in self.k)

    @property
    def b(self) -> tuple[mpf, ...]:
        return tuple(1 / ai for ai in self.a)

    def xi(self, y, t) -> tuple[mpf, ...]:
        y, t = real(y), real(t)
        return tuple(ki * (y - self.kappa * ci * t) for ki, ci in zip(self.k, self.c))


# ---------------------------------------------------------------------------
# tau-ratio representations
# ---------------------------------------------------------------------------

def hirota_g(spec: SolitonSpec, y, t) -> tuple[mpf, mpf, mpf, mpf]:
    """(log g1, log g2, d/dt log g1, d/dt log g2) by the 2^N exponential sum.

    Exponents are mu.(xi -/+ phi) + sum_{i<j} mu_i mu_j gamma_ij with
    e^{gamma_ij} = ((k_i-k_j)/(k_i+k_j))^2; time derivatives are analytic
    (softmax-weighted means of the exponent derivatives), never differenced.
    """
    n = spec.n
    xi = spec.xi(y, t)
    phi = spec.phi
    dxi_dt = tuple(-ki * spec.kappa * ci for ki, ci in zip(spec.k, spec.c))
    gamma = {}
    for i, j in itertools.combinations(range(n), 2):
        gamma[i, j] = 2 * mpmath.log(abs((spec.k[i] - spec.k[j]) / (spec.k[i] + spec.k[j])))

    acc1 = LogSumAccumulator()
    acc2 = LogSumAccumulator()
    for mu in itertools.product((0, 1), repeat=n):
        inter = sum((gamma[i, j] for i, j in itertools.combinations(range(n), 2)
                     if mu[i] and mu[j]), mpf(0))
        base = sum((xi[i] for i in range(n) if mu[i]), mpf(0)) + inter
        shift = sum((phi[i] for i in range(n) if mu[i]), mpf(0))
        dt = sum((dxi_dt[i] for i in range(n) if mu[i]), mpf(0))
        acc1.add(base - shift, (dt,))
        acc2.add(base + shift, (dt,))
    log_g1, (dt_log_g1,) = log_sum_exp(acc1)
    log_g2, (dt_log_g2,) = log_sum_exp(acc2)
    return log_g1, log_g2, dt_log_g1, dt_log_g2


def _subset_interaction(k: tuple[mpf, ...], subset: tuple[int, ...]) -> mpf:
    """log of prod_{j notin I, l in I} sgn(j-l)(k_j+k_l)/(k_j-k_l); positive
    for increasing k since sgn(j-l) matches sgn(k_j-k_l)."""
    inside = set(subset)
    log_prod = mpf(0)
    for l in subset:
        for j in range(len(k)):
            if j == l or j in inside:
                continue
            log_prod += mpmath.log((k[j] + k[l]) / abs(k[j] - k[l]))
    return log_prod


def subset_g(spec: SubsetFormSpec, y, t) -> tuple[mpf, mpf]:
    """(log g1, log g2) by the subset-sum representation; the empty subset
    contributes exactly 1, every other term is positive."""
    n = spec.n
    xi = spec.xi(y, t)
    log_a = tuple(mpmath.log(ai) for ai in spec.a)
    acc1 = LogSumAccumulator()
    acc2 = LogSumAccumulator()
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            inter = _subset_interaction(spec.k, subset)
            two_xi = 2 * sum((xi[i] for i in subset), mpf(0))
            la = sum((log_a[i] for i in subset), mpf(0))
            acc1.add(two_xi - la + inter)
            acc2.add(two_xi + la + inter)
    log_g1, _ = log_sum_exp(acc1)
    log_g2, _ = log_sum_exp(acc2)
    return log_g1, log_g2


def subset_to_hirota(spec: SubsetFormSpec) -> SolitonSpec:
    """Named conversion between the two wave-number conventions.

    Doubling the wave numbers matches the speeds and a_i <-> e^{phi_i}; the
    per-index interaction phase varphi_i = ln prod_{j != i} sgn(j-i)
    (k_j+k_i)/(k_j-k_i) is absorbed into the exponential-sum phases so that
    both representations evaluate to identical g1, g2 at every (y, t).
    """
    n = spec.n
    k2 = tuple(2 * ki for ki in spec.k)
    y0 = []
    for i in range(n):
        varphi = mpf(0)
        for j in range(n):
            if j == i:
                continue
            varphi += mpmath.log((spec.k[j] + spec.k[i]) / abs(spec.k[j] - spec.k[i]))
        y0.append(-varphi / k2[i])
    return SolitonSpec(spec.kappa, k2, tuple(y0), mpf(0))


@dataclass
class FormEquivalenceReport:
    max_residual: mpf
    worst: tuple
    threshold: mpf = FORM_EQUIVALENCE_RTOL
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def form_equivalence(spec: SubsetFormSpec, samples,
                     threshold: mpf = FORM_EQUIVALENCE_RTOL) -> FormEquivalenceReport:
    """Compare subset and exponential-sum forms of log g1, log g2 at the given
    (y, t) samples."""
    hspec = subset_to_hirota(spec)
    worst = mpf(0)
    worst_at = None
    violations = []
    for y, t in samples:
        sg1, sg2 = subset_g(spec, y, t)
        hg1, hg2, _, _ = hirota_g(hspec, y, t)
        res = max(abs(sg1 - hg1) / max(abs(sg1), mpf(1)),
                  abs(sg2 - hg2) / max(abs(sg2), mpf(1)))
        if res > worst:
            worst, worst_at = res, (real(y), real(t))
        if res > threshold:
            violations.append((real(y), real(t), res, (sg1, hg1), (sg2, hg2)))
    rep = FormEquivalenceReport(worst, worst_at, threshold=threshold)
    rep.violations = violations
    return rep


# ---------------------------------------------------------------------------
# Wronskian route and the order-(N+1) determinant checks
# ---------------------------------------------------------------------------

def _wronskian_columns(spec: SubsetFormSpec, y, t):
    """Columns Phi_i and their y-derivative generators: Phi_i alternates
    cosh xi_i (odd index) and sinh xi_i (even index); d/dy swaps the pair and
    multiplies by k_i."""
    xi = spec.xi(y, t)
    cols = []
    for i in range(spec.n):
        even_fn = mpmath.cosh if i % 2 == 0 else mpmath.sinh
        odd_fn = mpmath.sinh if i % 2 == 0 else mpmath.cosh
        cols.append((even_fn(xi[i]), odd_fn(xi[i]), spec.k[i]))
    return cols


def _wronskian(cols, extra=None) -> mpf:
    """det of [d^r/dy^r column_j], r = 0..size-1. `extra` appends a pure
    exponential column (value, rate)."""
    size = len(cols) + (1 if extra is not None else 0)
    mat = []
    for r in range(size):
        row = []
        for val0, val1, k in cols:
            v = val0 if r % 2 == 0 else val1
            row.append(k ** r * v)
        if extra is not None:
            val, rate = extra
            row.append(rate ** r * val)
        mat.append(row)
    return det_dense(mat)


def wronskian_forms(spec: SubsetFormSpec, y, t) -> tuple[mpf, mpf, mpf]:
    """(f1, f2, r): Wronskian-ratio solution pieces and the reciprocal factor
    r = kappa f1 f2 / prod(k_i^2 - 1/(4 kappa^2)) > 0."""
    y, t = real(y), real(t)
    cols = _wronskian_columns(spec, y, t)
    w0 = _wronskian(cols)
    if w0 == 0:
        raise DegenerateSpecError("denominator Wronskian vanished")
    half = y / (2 * spec.kappa)
    f1 = _wronskian(cols, extra=(mpmath.exp(half), 1 / (2 * spec.kappa))) / w0
    f2 = _wronskian(cols, extra=(mpmath.exp(-half), -1 / (2 * spec.kappa))) / w0
    denom = mpf(1)
    for ki in spec.k:
        denom *= ki ** 2 - 1 / (4 * spec.kappa ** 2)
    return f1, f2, spec.kappa * f1 * f2 / denom


def wronskian_relationship_residual(spec: SubsetFormSpec, y, t) -> mpf:
    """Relative residual of (-1)^N f1/f2 = e^{y/kappa} (g1/g2) prod a_i."""
    f1, f2, _ = wronskian_forms(spec, y, t)
    log_g1, log_g2 = subset_g(spec, y, t)
    lhs = (-1) ** spec.n * f1 / f2
    log_rhs = real(y) / spec.kappa + log_g1 - log_g2 \
        + sum((mpmath.log(ai) for ai in spec.a), mpf(0))
    rhs = mpmath.exp(log_rhs)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def _bordered_determinant(spec: SubsetFormSpec, y, t, primed: bool) -> mpf:
    """The (N+1) x (N+1) determinant with columns e^{2 xi_i} k_i^r +
    (-1)^{i-1} (-k_i)^r and a final geometric column in 2 kappa (or its primed
    variant in -1/(2 kappa))."""
    n = spec.n
    xi = spec.xi(y, t)
    e2 = [mpmath.exp(2 * x) for x in xi]
    mat = []
    for r in range(n + 1):
        row = []
        for i in range(n):
            row.append(spec.k[i] ** r * e2[i] + (-1) ** i * (-spec.k[i]) ** r)
        if primed:
            row.append((-1 / (2 * spec.kappa)) ** r)
        else:
            row.append((2 * spec.kappa) ** (n - r))
        mat.append(row)
    det = det_dense(mat)
    if primed:
        # the primed closed form is stated for (-2 kappa)^N times this column
        det *= (-2 * spec.kappa) ** n
    return det


def _bordered_expansion(spec: SubsetFormSpec, y, t, primed: bool) -> mpf:
    """Closed-form subset expansion of the same determinant."""
    n = spec.n
    k = spec.k
    kap = spec.kappa
    xi = spec.xi(y, t)
    lo, hi = (-1, 1) if primed else (1, -1)  # signs of the 2*kappa*k factors

    def gamma_prod(subset):
        prod = mpf(1)
        for a, b in itertools.combinations(subset, 2):
            prod *= k[b] - k[a]
        return prod

    const = gamma_prod(tuple(range(n)))
    for ki in k:
        const *= 1 + lo * 2 * kap * ki
    total = const
    for r in range(1, n + 1):
        for subset in itertools.combinations(range(n), r):
            comp = tuple(i for i in range(n) if i not in subset)
            term = mpmath.exp(2 * sum((xi[i] for i in subset), mpf(0)))
            term *= gamma_prod(subset) * gamma_prod(comp)
            # the (1 -/+ 2 kappa k) factors are single products over I and its
            # complement; only the (k_i + k_j) factors pair up across the split
            for i in subset:
                term *= 1 + hi * 2 * kap * k[i]
            for j in comp:
                term *= 1 + lo * 2 * kap * k[j]
            for i in subset:
                for j in comp:
                    term *= k[i] + k[j]
            total += term
    return total


@dataclass
class DeterminantCheckReport:
    max_residual: mpf
    worst: tuple
    threshold: mpf = SECTION5_RTOL
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def determinant_a_checks(spec: SubsetFormSpec, samples,
                         threshold: mpf = SECTION5_RTOL) -> DeterminantCheckReport:
    """Direct vs closed-form evaluation of the bordered determinant and its
    primed variant at the given (y, t) samples."""
    if spec.n > 6:
        raise SolitonSpecError("bordered-determinant check limited to N <= 6")
    worst = mpf(0)
    worst_at = None
    violations = []
    for y, t in samples:
        for primed in (False, True):
            direct = _bordered_determinant(spec, y, t, primed)
            expanded = _bordered_expansion(spec, y, t, primed)
            res = abs(direct - expanded) / abs(expanded)
            tag = ("A_prime" if primed else "A", real(y), real(t))
            if res > worst:
                worst, worst_at = res, tag
            if res > threshold:
                violations.append((*tag, res))
    rep = DeterminantCheckReport(worst, worst_at, threshold=threshold)
    rep.violations = violations
    return rep


# ---------------------------------------------------------------------------
# parametric and physical evaluation
# ---------------------------------------------------------------------------

def eval_parametric(spec: SolitonSpec, y, t) -> tuple[mpf, mpf]:
    """(x, u) at parametric coordinate y: x = y/kappa + ln(g1/g2) + alpha,
    u = d/dt ln(g1/g2)."""
    log_g1, log_g2, dt1, dt2 = hirota_g(spec, y, t)
    x = real(y) / spec.kappa + log_g1 - log_g2 + spec.alpha
    return x, dt1 - dt2


def default_bracket_half_width(spec: SolitonSpec) -> mpf:
    """Initial half-width in y covering |ln(g1/g2)| ~ 2 N ln(2 c / kappa^2)."""
    return 10 + 4 * spec.n * abs(mpmath.log(1 / spec.kappa))


class PhysicalMap:
    """Monotone map y -> x(y, t) for a fixed spec and time, with memoized
    inversion. Known (x, y) pairs bracket later queries, so sweeps over sorted
    grids converge in a handful of iterations per point.

    The per-term exponent structure (linear coefficient in y and the constant
    part at the fixed t) is precomputed once; evaluation then costs one exp
    per tau-function term. A regression test pins this fast path to hirota_g.
    """

    def __init__(self, spec: SolitonSpec, t, tol=DEFAULT_INVERSION_TOL):
        self.spec = spec
        self.t = real(t)
        self.tol = real(tol)
        self._xs: list[float] = []   # float keys for cheap bisect
        self._xv: list[mpf] = []     # exact x values
        self._ys: list[mpf] = []
        self._build_terms()

    def _build_terms(self):
        spec, t = self.spec, self.t
        n = spec.n
        k, c, phi, y0 = spec.k, spec.c, spec.phi, spec.y0
        gamma = {}
        for i, j in itertools.combinations(range(n), 2):
            gamma[i, j] = 2 * mpmath.log(abs((k[i] - k[j]) / (k[i] + k[j])))
        self._terms = []  # (k_coef, const_g1, const_g2, dt_value)
        for mu in itertools.product((0, 1), repeat=n):
            active = [i for i in range(n) if mu[i]]
            k_coef = sum((k[i] for i in active), mpf(0))
            const = sum((k[i] * (-spec.kappa * c[i] * t - y0[i]) for i in active), mpf(0))
            const += sum((gamma[i, j] for i, j in itertools.combinations(range(n), 2)
                          if mu[i] and mu[j]), mpf(0))
            shift = sum((phi[i] for i in active), mpf(0))
            dt = sum((-k[i] * spec.kappa * c[i] for i in active), mpf(0))
            self._terms.append((k_coef, const - shift, const + shift, dt))

    def _eval(self, y, with_dy: bool = False, with_dt: bool = False):
        """(log(g1/g2), its y-derivative or None, its t-derivative or None)."""
        exp = mpmath.exp
        exps1 = []
        exps2 = []
        for k_coef, c1, c2, _ in self._terms:
            base = k_coef * y
            exps1.append(base + c1)
            exps2.append(base + c2)
        m1, m2 = max(exps1), max(exps2)
        s1 = s2 = mpf(0)
        w1 = []
        w2 = []
        for l1, l2 in zip(exps1, exps2):
            e1 = exp(l1 - m1)
            e2 = exp(l2 - m2)
            s1 += e1
            s2 += e2
            if with_dy or with_dt:
                w1.append(e1)
                w2.append(e2)
        val = m1 + mpmath.log(s1) - m2 - mpmath.log(s2)
        dy = dt = None
        if with_dy:
            a1 = a2 = mpf(0)
            for e1, e2, (k_coef, _, _, _) in zip(w1, w2, self._terms):
                a1 += e1 * k_coef
                a2 += e2 * k_coef
            dy = a1 / s1 - a2 / s2
        if with_dt:
            a1 = a2 = mpf(0)
            for e1, e2, (_, _, _, dtv) in zip(w1, w2, self._terms):
                a1 += e1 * dtv
                a2 += e2 * dtv
            dt = a1 / s1 - a2 / s2
        return val, dy, dt

    def x_of_y(self, y) -> mpf:
        y = real(y)
        val, _, _ = self._eval(y)
        return y / self.spec.kappa + val + self.spec.alpha

    def u_of_y(self, y) -> mpf:
        _, _, dt = self._eval(real(y), with_dt=True)
        return dt

    def _remember(self, x, y) -> None:
        xf = float(x)
        i = bisect_left(self._xs, xf)
        self._xs.insert(i, xf)
        self._xv.insert(i, x)
        self._ys.insert(i, y)

    def _initial_bracket(self, x):
        # float keys are approximate near ties, so re-check the exact values
        i = bisect_left(self._xs, float(x))
        while i > 0 and self._xv[i - 1] > x:
            i -= 1
        while i < len(self._xv) and self._xv[i] < x:
            i += 1
        lo = (self._ys[i - 1], self._xv[i - 1]) if i > 0 else None
        hi = (self._ys[i], self._xv[i]) if i < len(self._xv) else None
        return lo, hi

    def invert(self, x) -> mpf:
        """y* with |x(y*) - x| <= tol: bracket (expanding if needed), then
        Newton with the analytic slope dx/dy, bisection-safeguarded."""
        x = real(x)
        lo, hi = self._initial_bracket(x)
        w = default_bracket_half_width(self.spec)
        doublings = 0
        while lo is None or hi is None:
            if lo is None:
                y = self.spec.kappa * (x - w) if not self._ys else min(self._ys) - w * self.spec.kappa
                fy = self.x_of_y(y)
                self._remember(fy, y)
                if fy <= x:
                    lo = (y, fy)
            if hi is None:
                y = self.spec.kappa * (x + w) if not self._ys else max(self._ys) + w * self.spec.kappa
                fy = self.x_of_y(y)
                self._remember(fy, y)
                if fy >= x:
                    hi = (y, fy)
            w *= 2
            doublings += 1
            if doublings > MAX_BRACKET_DOUBLINGS:
                raise InversionError(
                    f"bracket expansion failed at x={x}, t={self.t}, kappa={self.spec.kappa}")
        (ya, fa), (yb, fb) = lo, hi
        fa, fb = fa - x, fb - x
        if abs(fa) <= self.tol:
            return ya
        if abs(fb) <= self.tol:
            return yb
        # start from the secant through the bracket endpoints
        y = (ya * fb - yb * fa) / (fb - fa)
        for _ in range(10000):
            if not ya < y < yb:
                y = (ya + yb) / 2
            val, dy, _ = self._eval(y, with_dy=True)
            f = y / self.spec.kappa + val + self.spec.alpha - x
            if abs(f) <= self.tol:
                self._remember(f + x, y)
                return y
            if f > 0:
                yb, fb = y, f
            else:
                ya, fa = y, f
            slope = 1 / self.spec.kappa + dy  # = 1/r > 0
            y = y - f / slope
        raise InversionError(f"inversion did not converge at x={x}, t={self.t}")

    def u_of_x(self, x) -> mpf:
        return self.u_of_y(self.invert(x))


def eval_physical(spec: SolitonSpec, x, t, tol=DEFAULT_INVERSION_TOL) -> mpf:
    """u at physical position x, via monotone inversion of x(y, t)."""
    if real(tol) <= 0:
        raise SolitonSpecError("inversion tolerance must be positive")
    return PhysicalMap(spec, t, tol).u_of_x(x)


def pde_residual(spec: SolitonSpec, x, t, h, pmap_cache: dict | None = None) -> mpf:
    """Centered finite-difference residual of the dispersive equation

        u_t + 2 w u_x - u_xxt + 3 u u_x - 2 u_x u_xx - u u_xxx,  w = kappa^2,

    at (x, t) with stencil spacing h in both variables; O(h^2) for the smooth
    solution. `pmap_cache` (t-value -> PhysicalMap) lets stencil studies reuse
    inversions across calls.
    """
    x, t, h = real(x), real(t), real(h)
    if h <= 0:
        raise SolitonSpecError("stencil spacing must be positive")
    if pmap_cache is None:
        pmap_cache = {}

    def pmap(tv) -> PhysicalMap:
        if tv not in pmap_cache:
            pmap_cache[tv] = PhysicalMap(spec, tv)
        return pmap_cache[tv]

    def u(xv, tv):
        return pmap(tv).u_of_x(xv)

    # x-derivatives at time t
    um2, um1, u0, up1, up2 = (u(x + i * h, t) for i in range(-2, 3))
    ux = (up1 - um1) / (2 * h)
    uxx = (up2 - 2 * u0 + um2) / (4 * h * h)
    uxxx = (up2 - 2 * up1 + 2 * um1 - um2) / (2 * h ** 3)
    # t-derivatives
    ut = (u(x, t + h) - u(x, t - h)) / (2 * h)
    uxx_p = (u(x + 2 * h, t + h) - 2 * u(x, t + h) + u(x - 2 * h, t + h)) / (4 * h * h)
    uxx_m = (u(x + 2 * h, t - h) - 2 * u(x, t - h) + u(x - 2 * h, t - h)) / (4 * h * h)
    uxxt = (uxx_p - uxx_m) / (2 * h)
    omega = spec.kappa ** 2
    return ut + 2 * omega * ux - uxxt + 3 * u0 * ux - 2 * ux * uxx - u0 * uxxx
