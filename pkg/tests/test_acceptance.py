"""Acceptance gate: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL line
for every criterion as it completes.  Criterion tolerances are fixed here,
not tuned at runtime.
"""

import math
import time

import numpy as np
import pytest

from barrierscope import (
    ELECTRON,
    IntegrationSettings,
    builtin_arbitrary,
    builtin_parabolic,
    builtin_square,
    compare_to_harmonic,
    density_peak_positions,
    density_profile,
    harmonic_omega_from_parabola,
    initial_conditions,
    integrate_backward,
    mirrored,
    parse_potential,
    propagate_backward,
    scan_resonances,
    shoot_eigenstate,
    solve_backward,
    solve_transfer_matrix,
)

# closed-form transmission for the 1 eV x 1 nm square barrier at 0.5 eV
T_SQUARE_HALF_EV = 0.002850146714997131

# shared 100-point comparison grid over the parabolic barrier's active range
GRID = np.linspace(0.05, 10.0, 100)


def _verdict(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    return line


@pytest.fixture(scope="module")
def parabola():
    return builtin_parabolic()


@pytest.fixture(scope="module")
def reference_curve(parabola):
    settings = IntegrationSettings(steps=2000)
    return np.array([solve_backward(parabola, float(E), settings).T for E in GRID])


@pytest.fixture(scope="module")
def matched_peaks(parabola):
    peaks = scan_resonances(parabola, 0.05, 10.0, coarse_points=2000, resolution=2000)
    return compare_to_harmonic(peaks, harmonic_omega_from_parabola(10.0))


def test_criterion_1_unitarity_suite(parabola):
    settings = IntegrationSettings(steps=2000)
    energies = np.linspace(0.05, 9.95, 200)
    start = time.perf_counter()
    worst = 0.0
    for E in energies:
        sol = solve_backward(parabola, float(E), settings)
        worst = max(worst, abs(sol.T + sol.R - 1.0))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 10.0
    line = _verdict(1, ok, f"max|T+R-1| = {worst:.3e} over 200 energies in {elapsed:.2f}s")
    assert ok, line


def test_criterion_2_analytic_oracle():
    p = builtin_square()
    back = solve_backward(p, 0.5, IntegrationSettings(steps=2000))
    tmm = solve_transfer_matrix(p, 0.5, 1)
    err_b = abs(back.T - T_SQUARE_HALF_EV) / T_SQUARE_HALF_EV
    err_t = abs(tmm.T - T_SQUARE_HALF_EV) / T_SQUARE_HALF_EV
    ok = err_b < 1e-8 and err_t < 1e-8
    line = _verdict(2, ok, f"rel errors vs closed form: backward {err_b:.2e}, "
                           f"single-slice tmm {err_t:.2e}")
    assert ok, line


def test_criterion_3_cross_method_convergence(parabola, reference_curve):
    errors = []
    for slices in (10, 20, 50, 100, 200, 500, 1000):
        T = np.array([solve_transfer_matrix(parabola, float(E), slices).T for E in GRID])
        errors.append(float(np.max(np.abs(T - reference_curve))))
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    ok = monotone and errors[-1] < 1e-4
    line = _verdict(3, ok, f"max|dT| by slices: " +
                    ", ".join(f"{e:.2e}" for e in errors) +
                    f"; monotone={monotone}")
    assert ok, line


def test_criterion_4_step_efficiency(parabola, reference_curve):
    T_b300 = np.array([solve_backward(parabola, float(E),
                                      IntegrationSettings(steps=300)).T for E in GRID])
    T_t300 = np.array([solve_transfer_matrix(parabola, float(E), 300).T for E in GRID])
    err_b = float(np.max(np.abs(T_b300 - reference_curve)))
    err_t = float(np.max(np.abs(T_t300 - reference_curve)))
    ok = err_b < 1e-3 and err_t > err_b
    line = _verdict(4, ok, f"300-step backward err {err_b:.2e} (< 1e-3); "
                           f"300-slice tmm err {err_t:.2e} (strictly larger)")
    assert ok, line


def test_criterion_5_resonance_positions(matched_peaks):
    hw = harmonic_omega_from_parabola(10.0)
    clause_hw = abs(hw - 1.232) / 1.232 < 0.005

    below10 = [q for q in matched_peaks if q.E_peak < 10.0]
    assert len(below10) >= 8, f"expected >= 8 resonances below 10 eV, found {len(below10)}"

    low = {q.n_match: q for q in below10 if q.n_match in (0, 1, 2)}
    clause_low = (len(low) == 3 and
                  all(abs(q.deviation) <= 0.02 for q in low.values()))

    tail = sorted((q for q in below10 if q.n_match >= 3), key=lambda q: q.n_match)
    devs = [q.deviation for q in tail]
    nonnegative = all(d >= 0.0 for d in devs)
    nondecreasing = all(b >= a for a, b in zip(devs, devs[1:]))

    top = below10[-1]
    clause_top = (10 <= top.n_match <= 12) and (0.10 <= top.deviation <= 0.25)

    detail = (f"hbar*omega={hw:.6f} ({'ok' if clause_hw else 'off'}); "
              f"n=0..2 devs "
              + ", ".join(f"{low[n].deviation:+.2e}" for n in sorted(low)) +
              f" ({'ok' if clause_low else 'off'}); "
              f"n>=3 devs " + ", ".join(f"{d:+.2e}" for d in devs) +
              f" (nonneg={nonnegative}, nondecr={nondecreasing}); "
              f"highest peak below 10 eV: n={top.n_match} at {top.E_peak:.4f} eV, "
              f"dev {top.deviation:+.2%} (needs n~11 and 10..25%)")
    ok = clause_hw and clause_low and nonnegative and nondecreasing and clause_top
    line = _verdict(5, ok, detail)
    assert ok, line


def test_criterion_6_eigenfunction_comparison(parabola, matched_peaks):
    n5 = next(q for q in matched_peaks if q.n_match == 5)
    settings = IntegrationSettings(steps=2000, record_trajectory=True)
    sol = solve_backward(parabola, n5.E_peak, settings)
    dens = density_profile(sol.trajectory)
    res_lobes = density_peak_positions(sol.trajectory.xs, dens)
    state = shoot_eigenstate(parabola, 5)
    eig_lobes = density_peak_positions(state.xs, state.density)
    counts_ok = len(res_lobes) == 6 and len(eig_lobes) == 6
    if counts_ok:
        gap = float(np.max(np.abs(res_lobes - eig_lobes)))
    else:
        gap = math.inf
    ok = counts_ok and gap <= 0.05
    line = _verdict(6, ok, f"resonant lobes {len(res_lobes)}, eigenstate lobes "
                           f"{len(eig_lobes)}, max position gap {gap:.4f} nm")
    assert ok, line


def test_criterion_7_standin_arbitrary_barrier():
    p = builtin_arbitrary()
    settings = IntegrationSettings(steps=2000)
    worst_unitarity = 0.0
    t_min, t_max = 1.0, 0.0
    for E in np.linspace(0.05, 9.95, 200):
        sol = solve_backward(p, float(E), settings)
        worst_unitarity = max(worst_unitarity, abs(sol.T + sol.R - 1.0))
        t_min = min(t_min, sol.T)
        t_max = max(t_max, sol.T)
    ok = 0.0 < t_min and t_max < 1.0 and worst_unitarity < 1e-6
    line = _verdict(7, ok, f"stand-in barrier: T in [{t_min:.3e}, {t_max:.6f}], "
                           f"max|T+R-1| = {worst_unitarity:.2e}")
    assert ok, line


def test_criterion_8_property_suites():
    checks = {}

    # Wronskian constancy on a smooth barrier at moderate resolution
    gentle = parse_potential("on [0,2): 2*(x-1)^2")
    k_out = math.sqrt(3.0 / ELECTRON.hbar2_over_2m)
    worst = 0.0
    for method in ("rk4", "numerov"):
        t = integrate_backward(gentle, 3.0,
                               IntegrationSettings(method=method, steps=500,
                                                   record_trajectory=True))
        worst = max(worst, float(np.max(np.abs(t.wronskian() - k_out)) / k_out))
    checks["wronskian<1e-7"] = worst < 1e-7

    # mirror reciprocity
    p = builtin_arbitrary()
    a = solve_backward(p, 5.0, IntegrationSettings(steps=2000)).T
    b = solve_backward(mirrored(p), 5.0, IntegrationSettings(steps=2000)).T
    checks["reciprocity<1e-8"] = abs(a - b) / a < 1e-8

    # linearity of the propagation in the initial data
    settings = IntegrationSettings(steps=200, record_trajectory=True)
    psi_L, dpsi_L = initial_conditions(gentle, 3.0)
    base = propagate_backward(gentle, 3.0, settings, ELECTRON, psi_L, dpsi_L)
    c = -1.5 + 2.0j
    scaled = propagate_backward(gentle, 3.0, settings, ELECTRON, c * psi_L, c * dpsi_L)
    checks["linearity<1e-12"] = bool(
        np.max(np.abs(scaled.psi - c * base.psi) / np.abs(c * base.psi)) < 1e-12)

    # fourth-order convergence of both steppers
    ref = integrate_backward(gentle, 3.0, IntegrationSettings(steps=100000)).psi[0]
    slopes_ok = True
    for method in ("rk4", "numerov"):
        errs = [abs(integrate_backward(gentle, 3.0,
                                       IntegrationSettings(method=method, steps=s)).psi[0] - ref)
                for s in (50, 100, 200, 400)]
        slope = float(np.polyfit(np.log([50, 100, 200, 400]), np.log(errs), 1)[0])
        slopes_ok = slopes_ok and -4.5 < slope < -3.5
    checks["order~h^4"] = slopes_ok

    # parser round trip on every builtin
    from barrierscope import BUILTINS, parse_potential as reparse
    rt_ok = True
    for ctor in BUILTINS.values():
        q = ctor()
        r = reparse(q.render())
        xs = np.linspace(0.0, q.length, 1000)
        va, vb = q.values(xs), r.values(xs)
        scale = np.maximum(np.abs(va), 1.0)
        rt_ok = rt_ok and float(np.max(np.abs(va - vb) / scale)) < 1e-12
    checks["round-trip<1e-12"] = rt_ok

    ok = all(checks.values())
    line = _verdict(8, ok, "; ".join(f"{name}: {'ok' if good else 'FAIL'}"
                                     for name, good in checks.items()))
    assert ok, line
