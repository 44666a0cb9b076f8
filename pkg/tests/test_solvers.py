"""Solver cross-checks against closed forms and each other."""

import math

import numpy as np
import pytest

from barrierscope import (
    DivergenceError,
    DomainError,
    HBAR2_OVER_2M_ELECTRON,
    IntegrationSettings,
    InvalidIncidenceError,
    builtin_arbitrary,
    builtin_double_barrier,
    builtin_parabolic,
    builtin_square,
    forbidden_intervals,
    mirrored,
    parse_potential,
    solve,
    solve_backward,
    solve_transfer_matrix,
    solve_wkb,
)

H2M = HBAR2_OVER_2M_ELECTRON

# closed-form transmission of the 1 eV x 1 nm rectangular barrier at 0.5 eV
T_SQUARE_HALF_EV = 0.002850146714997131


def rectangular_T(V0, L, E):
    kappa = math.sqrt((V0 - E) / H2M)
    return 1.0 / (1.0 + V0**2 * math.sinh(kappa * L) ** 2 / (4.0 * E * (V0 - E)))


def test_rectangular_oracle_value():
    assert rectangular_T(1.0, 1.0, 0.5) == pytest.approx(T_SQUARE_HALF_EV, rel=1e-15)


class TestEmptyBarrier:
    def test_backward_no_scattering(self):
        sol = solve_backward(builtin_square(height=0.0), 1.0)
        assert sol.T == pytest.approx(1.0, abs=1e-10)
        assert sol.R == pytest.approx(0.0, abs=1e-10)
        assert abs(sol.B) < 1e-10
        assert sol.F == 1.0

    @pytest.mark.parametrize("slices", [1, 7, 100])
    def test_transfer_matrix_is_transparent(self, slices):
        sol = solve_transfer_matrix(builtin_square(height=0.0), 1.0, slices)
        assert sol.T == pytest.approx(1.0, abs=1e-12)


class TestSquareBarrier:
    def test_backward_matches_closed_form(self):
        sol = solve_backward(builtin_square(), 0.5, IntegrationSettings(steps=2000))
        assert sol.T == pytest.approx(T_SQUARE_HALF_EV, rel=1e-8)
        assert sol.T + sol.R == pytest.approx(1.0, abs=1e-10)

    def test_single_slice_is_exact(self):
        sol = solve_transfer_matrix(builtin_square(), 0.5, 1)
        assert sol.T == pytest.approx(T_SQUARE_HALF_EV, rel=1e-12)

    def test_many_slices_stay_exact(self):
        # every slab samples the same constant, so slicing changes nothing
        sol = solve_transfer_matrix(builtin_square(), 0.5, 250)
        assert sol.T == pytest.approx(T_SQUARE_HALF_EV, rel=1e-10)


def test_step_geometry_limit():
    """A vanishing-width barrier onto a raised exit level is a step."""
    V0 = 1.0
    E = 2.0
    p = parse_potential(f"right = {V0}\non [0,1e-6): {V0}")
    k1 = math.sqrt(E / H2M)
    k3 = math.sqrt((E - V0) / H2M)
    T_step = 4.0 * k1 * k3 / (k1 + k3) ** 2
    sol = solve_backward(p, E, IntegrationSettings(steps=50))
    assert sol.T == pytest.approx(T_step, rel=1e-8)
    sol_t = solve_transfer_matrix(p, E, 1)
    assert sol_t.T == pytest.approx(T_step, rel=1e-10)


def test_parabolic_barrier_unitary_midrange():
    sol = solve_backward(builtin_parabolic(), 7.5, IntegrationSettings(steps=2000))
    assert 0.0 < sol.T < 1.0
    assert sol.T + sol.R == pytest.approx(1.0, abs=1e-6)


def test_cross_solver_agreement_on_parabola():
    E = 5.0
    back = solve_backward(builtin_parabolic(), E, IntegrationSettings(steps=2000))
    tmm = solve_transfer_matrix(builtin_parabolic(), E, 1000)
    assert abs(back.T - tmm.T) < 1e-4


class TestClosedChannel:
    def test_backward_returns_zero_transmission(self):
        p = parse_potential("right = 2.0\non [0,1): 1")
        sol = solve_backward(p, 1.5)
        assert sol.T == 0.0
        assert sol.R == 1.0
        assert sol.closed_channel
        assert sol.A is None and sol.trajectory is None
        assert sol.k_out.regime == "evanescent"

    def test_all_solvers_agree_on_convention(self):
        p = parse_potential("right = 2.0\non [0,1): 1")
        for tag in ("backward", "tmm", "wkb"):
            sol = solve(p, 1.5, solver=tag)
            assert sol.T == 0.0 and sol.closed_channel


class TestInvalidIncidence:
    def test_raised_below_entry_level(self):
        p = parse_potential("left = 2.0\nright = 0.0\non [0,1): 1")
        for tag in ("backward", "tmm", "wkb"):
            with pytest.raises(InvalidIncidenceError):
                solve(p, 1.5, solver=tag)

    def test_raised_at_zero_incident_wavevector(self):
        with pytest.raises(InvalidIncidenceError):
            solve_backward(builtin_square(), 0.0)


def test_mirror_reciprocity():
    """Equal exterior levels: reflecting the barrier leaves T unchanged."""
    p = builtin_arbitrary()
    m = mirrored(p)
    for E in (2.0, 5.0, 7.5, 9.0):
        a = solve_backward(p, E, IntegrationSettings(steps=2000))
        b = solve_backward(m, E, IntegrationSettings(steps=2000))
        assert b.T == pytest.approx(a.T, rel=1e-8)


def test_flux_factor_identity():
    """T from the endpoint formula equals k_out|F|^2 / (k_in|A|^2)."""
    p = parse_potential("right = 0.5\non [0,1): 1")
    sol = solve_backward(p, 2.0, IntegrationSettings(steps=1000))
    recomputed = (sol.k_out.value * abs(sol.F) ** 2) / (sol.k_in.value * abs(sol.A) ** 2)
    assert sol.T == pytest.approx(recomputed, rel=1e-12)
    assert sol.k_out.value != sol.k_in.value


def test_low_resolution_flag():
    sol = solve_backward(builtin_square(), 0.5, IntegrationSettings(steps=4))
    assert "low_resolution" in sol.flags
    sol = solve_backward(builtin_square(), 0.5, IntegrationSettings(steps=5))
    assert "low_resolution" not in sol.flags


def test_degenerate_slab_uses_linear_solution():
    # at E exactly equal to the slab potential the wave is linear in x;
    # for a flat barrier T = 1/(1 + (kL/2)^2) follows by hand
    E = 1.0
    p = builtin_square(height=1.0, width=1.0)
    k = math.sqrt(E / H2M)
    expected = 1.0 / (1.0 + (k * 1.0 / 2.0) ** 2)
    for slices in (1, 7):
        sol = solve_transfer_matrix(p, E, slices)
        assert sol.T == pytest.approx(expected, rel=1e-12)
    back = solve_backward(p, E, IntegrationSettings(steps=100))
    assert back.T == pytest.approx(expected, rel=1e-10)


def test_transfer_matrix_records_boundary_trajectory():
    p = builtin_parabolic()
    sol = solve_transfer_matrix(p, 5.0, 64, record_trajectory=True)
    t = sol.trajectory
    assert len(t) == 65
    assert t.xs[0] == 0.0 and t.xs[-1] == p.length
    k_out = sol.k_out.value
    # slab propagation is exact, so the flux is conserved to roundoff
    assert np.max(np.abs(t.wronskian() - k_out)) / k_out < 1e-10


def test_divergence_propagates_from_solvers():
    tall = parse_potential("on [0,2): 1e4")
    with pytest.raises(DivergenceError):
        solve_backward(tall, 1.0, IntegrationSettings(steps=300))
    with pytest.raises(DivergenceError):
        solve_transfer_matrix(tall, 1.0, 4)


class TestWKB:
    def test_square_barrier_pure_exponential(self):
        kappa = math.sqrt(0.5 / H2M)
        expected = math.exp(-2.0 * kappa * 1.0)
        sol = solve_wkb(builtin_square(), 0.5)
        assert sol.T == pytest.approx(expected, rel=1e-10)
        assert sol.R == 1.0 - sol.T
        assert sol.A is None and sol.B is None

    def test_above_barrier_max_is_transparent(self):
        sol = solve_wkb(builtin_parabolic(), 11.0)
        assert sol.T == 1.0

    def test_parabola_turning_points(self):
        intervals = forbidden_intervals(builtin_parabolic(), 5.0)
        assert len(intervals) == 2
        (a1, b1, _), (a2, b2, _) = intervals
        assert a1 == 0.0
        assert b1 == pytest.approx(1.0 - math.sqrt(0.5), abs=1e-9)
        assert a2 == pytest.approx(1.0 + math.sqrt(0.5), abs=1e-9)
        assert b2 == 2.0

    def test_parabola_matches_adaptive_quadrature(self):
        # reference integral computed with adaptive quadrature ahead of time
        sol = solve_wkb(builtin_parabolic(), 5.0, quad_points=2001)
        assert sol.T == pytest.approx(1.7822298990239333e-04, rel=2e-4)

    def test_wkb_underestimates_deep_tunneling(self):
        wkb = solve_wkb(builtin_square(), 0.5)
        back = solve_backward(builtin_square(), 0.5, IntegrationSettings(steps=2000))
        assert wkb.T < back.T

    def test_wkb_bounded_by_one(self):
        for E in np.linspace(0.2, 12.0, 40):
            assert solve_wkb(builtin_parabolic(), float(E)).T <= 1.0

    def test_quad_points_validation(self):
        with pytest.raises(DomainError):
            solve_wkb(builtin_square(), 0.5, quad_points=2)


def test_dispatcher_aliases():
    sol = solve(builtin_square(), 0.5, solver="tmm", resolution=1)
    assert sol.solver_tag == "transfer_matrix"
    with pytest.raises(DomainError):
        solve(builtin_square(), 0.5, solver="magic")


def test_unitarity_on_double_barrier_grid():
    p = builtin_double_barrier()
    for E in np.linspace(0.2, 9.0, 45):
        sol = solve_backward(p, float(E), IntegrationSettings(steps=800))
        assert abs(sol.T + sol.R - 1.0) < 1e-6
        assert -1e-6 < sol.T < 1.0 + 1e-6
