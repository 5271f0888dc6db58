"""Acceptance gate: one test per release criterion.

Run with `pytest -v`; each criterion reports exactly one PASSED/FAILED line.
Tolerances and corpus sizes are pinned here and must not be loosened.
"""

import random
import time

import mpmath
from mpmath import mpf

from chlab.convergence import (SweepConfig, build_soliton_for_peakon,
                               leading_order_diagnostic, run_sweep)
from chlab.corpus import (random_peakon_spec, random_spectral_data,
                          random_subset_spec, random_yt_samples)
from chlab.hankel import (HankelIndex, hankel_det, hankel_det_naive,
                          hankel_matrix, identity_suite)
from chlab.limitprofile import equivalence_check
from chlab.peakon import (PeakonSpec, conserved_diagnostics, eval_peakon,
                          peakon_state, tilde_form_single_amplitude)
from chlab.soliton import (SolitonSpec, determinant_a_checks, form_equivalence,
                           SubsetFormSpec, pde_residual,
                           wronskian_relationship_residual)

SINGLE = PeakonSpec((mpf(2),), (mpf(0),))
PAIR = PeakonSpec((mpf(1), mpf(2)), (mpf(0), mpf(0)))


def test_c1_identity_suite_200_instances():
    start = time.monotonic()
    rng = random.Random(101)
    worst = mpf(0)
    for _ in range(200):
        data = random_spectral_data(rng, max_n=6)
        rep = identity_suite(data, threshold=mpf("1e-40"))
        assert rep.ok, rep.violations
        worst = max(worst, rep.max_residual)
    elapsed = time.monotonic() - start
    assert worst <= mpf("1e-40")
    assert elapsed <= 30, f"identity suite took {elapsed:.1f}s (limit 30s)"
    print(f"criterion 1 PASS: max residual {mpmath.nstr(worst, 3)}, {elapsed:.1f}s")


def test_c2_determinant_two_route_agreement_and_rank_collapse():
    rng = random.Random(101)  # same corpus construction as criterion 1
    worst = mpf(0)
    worst_collapse = mpf(0)
    for _ in range(200):
        data = random_spectral_data(rng, max_n=6)
        for m in range(-2, 4):
            for n in range(1, data.n + 1):
                a = hankel_det(data, HankelIndex(n, m))
                b = hankel_det_naive(data, HankelIndex(n, m))
                worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
        # order above rank: exactly zero via expansion, tiny via elimination
        n = data.n + 1
        for m in (-1, 0, 1, 2):
            assert hankel_det(data, HankelIndex(n, m)) == 0
            mat = hankel_matrix(data, n, m)
            scale = mpf(1)
            for row in mat:
                scale *= mpmath.sqrt(sum(x * x for x in row))
            worst_collapse = max(
                worst_collapse, abs(hankel_det_naive(data, HankelIndex(n, m))) / scale)
    assert worst <= mpf("1e-40")
    assert worst_collapse <= mpf("1e-30")
    print(f"criterion 2 PASS: two-route {mpmath.nstr(worst, 3)}, "
          f"collapse {mpmath.nstr(worst_collapse, 3)}")


def test_c3_bordered_determinant_and_wronskian_relationship():
    start = time.monotonic()
    rng = random.Random(303)
    worst_det = mpf(0)
    worst_rel = mpf(0)
    for n in range(1, 6):
        spec = random_subset_spec(rng, fixed_n=n)
        samples = random_yt_samples(rng, 20)
        rep = determinant_a_checks(spec, samples, threshold=mpf("1e-35"))
        assert rep.ok, rep.violations
        worst_det = max(worst_det, rep.max_residual)
        for y, t in samples:
            res = wronskian_relationship_residual(spec, y, t)
            assert res <= mpf("1e-35"), (n, y, t, res)
            worst_rel = max(worst_rel, res)
    elapsed = time.monotonic() - start
    assert elapsed <= 60, f"bordered-determinant checks took {elapsed:.1f}s (limit 60s)"
    print(f"criterion 3 PASS: determinants {mpmath.nstr(worst_det, 3)}, "
          f"relationship {mpmath.nstr(worst_rel, 3)}, {elapsed:.1f}s")


def test_c4_representation_equivalence():
    rng = random.Random(404)
    worst = mpf(0)
    for n in range(1, 6):
        spec = random_subset_spec(rng, fixed_n=n)
        rep = form_equivalence(spec, random_yt_samples(rng, 100),
                               threshold=mpf("1e-38"))
        assert rep.ok, rep.violations
        worst = max(worst, rep.max_residual)
    # near-degenerate wave-number spacing stress case
    stress = SubsetFormSpec(mpf("0.2"), (mpf(1), mpf(1) + mpf("1e-3")))
    rep = form_equivalence(stress, random_yt_samples(rng, 100),
                           threshold=mpf("1e-30"))
    assert rep.ok, rep.violations
    print(f"criterion 4 PASS: max residual {mpmath.nstr(worst, 3)}, "
          f"stress {mpmath.nstr(rep.max_residual, 3)}")


def test_c5_limit_profile_equals_peakon_superposition():
    rng = random.Random(505)
    worst = mpf(0)
    for n in range(1, 7):
        spec = random_peakon_spec(rng, fixed_n=n)
        for t in (mpf(-2), mpf(0), mpf(2)):
            state = peakon_state(spec, t)
            lo, hi = state.x[0] - 5, state.x[-1] + 5
            grid = [lo + i * (hi - lo) / 800 for i in range(801)]
            rep = equivalence_check(spec, t, grid, threshold=mpf("1e-35"))
            assert rep.ok, (n, t, rep.violations)
            worst = max(worst, rep.max_rel_diff)
    print(f"criterion 5 PASS: max relative difference {mpmath.nstr(worst, 3)}")


def test_c6_single_peakon_exactness_and_negative_oracle():
    c, p = mpf(2), mpf("0.3")
    spec = PeakonSpec((c,), (p,))
    worst = mpf(0)
    for t in (mpf(-1), mpf(0), mpf("2.5")):
        state = peakon_state(spec, t)
        for x in (mpf(-4), mpf(0), mpf("1.7"), mpf(5)):
            want = c * mpmath.exp(-abs(x - c * t - p - mpmath.log(2)))
            worst = max(worst, abs(eval_peakon(state, x) - want) / want)
    assert worst <= mpf("1e-74")  # working precision at 256 bits
    # the raw tilde-moment transcription gives 4c, not c
    assert abs(tilde_form_single_amplitude(c) - 4 * c) < mpf("1e-74")
    print(f"criterion 6 PASS: closed-form error {mpmath.nstr(worst, 3)}, "
          f"negative oracle amplitude 4c confirmed")


def test_c7_pde_residual_second_order():
    start = time.monotonic()
    h1, h2 = mpf("1e-2"), mpf("5e-3")
    specs = [
        SolitonSpec(mpf("0.5"), (mpf("1.2"),), (mpf(0),)),
        build_soliton_for_peakon(PAIR, mpf("0.4")),
    ]
    t = mpf("0.1")
    orders = []
    for spec in specs:
        cache = {}
        xs = [mpf(-5) + i * mpf(10) / 19 for i in range(20)]
        res1 = [pde_residual(spec, x, t, h1, cache) for x in xs]
        x_worst = max(zip((abs(r) for r in res1), xs))[1]
        r1 = abs(pde_residual(spec, x_worst, t, h1, cache))
        r2 = abs(pde_residual(spec, x_worst, t, h2, cache))
        order = mpmath.log(r1 / r2) / mpmath.log(2)
        orders.append(order)
        assert order >= mpf("1.8"), (spec.n, x_worst, r1, r2, order)
    elapsed = time.monotonic() - start
    assert elapsed <= 300, f"residual study took {elapsed:.1f}s (limit 300s)"
    print(f"criterion 7 PASS: observed orders "
          f"{[mpmath.nstr(o, 4) for o in orders]}, {elapsed:.1f}s")


def test_c8_convergence_sweeps():
    start = time.monotonic()
    config = SweepConfig()  # kappa = 2^-1 .. 2^-8, 801-point grids
    for target in (SINGLE, PAIR):
        report = run_sweep(target, config)
        assert report.ok, [e.error for e in report.entries if not e.ok]
        entries = report.entries_at(0)
        tail = entries[-3:]
        assert tail[0].d_shift > tail[1].d_shift > tail[2].d_shift
        assert entries[-1].d_shift <= mpf("0.05") * report.peak_amplitude
        # leading-order diagnostic sharpens between kappa = 2^-4 and 2^-6
        x_probe = peakon_state(target, 0).x[0] - 1
        coarse = leading_order_diagnostic(target, mpf(2) ** -4, 0, x_probe)
        fine = leading_order_diagnostic(target, mpf(2) ** -6, 0, x_probe)
        assert coarse.applicable and fine.applicable
        assert abs(fine.ratio - 1) < abs(coarse.ratio - 1)
        assert abs(fine.ratio - 1) < mpf("0.05")
        print(f"criterion 8 [n={target.n}]: final d_shift "
              f"{mpmath.nstr(entries[-1].d_shift, 4)}, leading-order ratio "
              f"{mpmath.nstr(fine.ratio, 8)}")
    elapsed = time.monotonic() - start
    assert elapsed <= 900, f"sweeps took {elapsed:.1f}s (limit 900s)"
    print(f"criterion 8 PASS: both sweeps converged, {elapsed:.1f}s")


def test_c9_conservation_laws():
    rng = random.Random(909)
    times = (mpf(-5), mpf("-2.5"), mpf(0), mpf("2.5"), mpf(5))
    worst_m = mpf(0)
    worst_h = mpf(0)
    for _ in range(50):
        spec = random_peakon_spec(rng, max_n=5)
        total_c = sum(spec.c, mpf(0))
        rep = conserved_diagnostics(spec, times, threshold=mpf("1e-35"))
        assert rep.ok, rep.violations
        for mom in rep.momentum:
            worst_m = max(worst_m, abs(mom - total_c) / total_c)
        worst_h = max(worst_h, rep.energy_drift)
    assert worst_m <= mpf("1e-35")
    assert worst_h <= mpf("1e-35")
    print(f"criterion 9 PASS: momentum error {mpmath.nstr(worst_m, 3)}, "
          f"energy drift {mpmath.nstr(worst_h, 3)}")
