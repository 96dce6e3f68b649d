import math

import numpy as np
import pytest
from scipy import integrate

from broadcast_sim.continuum_model import (
    ContinuumState, continuum_growth, disk_power_integral, disk_power_integral_at,
    frontier_1d, frontier_2d, line_power_integral, monte_carlo_disk_integral,
    strip_power_integral,
)
from broadcast_sim.utils.errors import InvalidParameterError, InvariantViolationError

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class TestLineIntegral:
    def test_log_case(self):
        assert line_power_integral(2.0, 1.0, 1.0) == pytest.approx(math.log(2.0), rel=1e-14)

    def test_square_case(self):
        assert line_power_integral(2.0, 1.0, 2.0) == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 0.999999, 1.5, 3.0])
    def test_matches_quadrature(self, alpha):
        expected, _ = integrate.quad(lambda u: (3.0 - u) ** -alpha, 0.0, 2.5)
        assert line_power_integral(3.0, 2.5, alpha) == pytest.approx(expected, rel=1e-9)

    def test_rejects_target_inside(self):
        with pytest.raises(InvalidParameterError):
            line_power_integral(1.0, 1.0, 2.0)


class TestDiskIntegral:
    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0, 3.0])
    def test_matches_direct_quadrature(self, alpha):
        closed = disk_power_integral(2.0, 1.0, alpha)
        direct = disk_power_integral_at((2.0, 0.0), 1.0, alpha)
        assert closed == pytest.approx(direct, rel=1e-8)

    def test_rotation_invariance(self):
        angle = 0.7
        rotated = disk_power_integral_at((2.0 * math.cos(angle), 2.0 * math.sin(angle)), 1.0, 1.5)
        assert rotated == pytest.approx(disk_power_integral(2.0, 1.0, 1.5), rel=1e-8)

    def test_far_target_sees_point_mass(self):
        x = 1000.0
        assert disk_power_integral(x, 1.0, 2.0) == pytest.approx(math.pi / x ** 2, rel=1e-5)

    def test_quasi_monte_carlo(self):
        estimate = monte_carlo_disk_integral(2.0, 1.0, 0.5, n_points=2 ** 20, seed=0)
        assert estimate == pytest.approx(disk_power_integral(2.0, 1.0, 0.5), rel=1e-4)

    def test_boundary_target(self):
        assert math.isfinite(disk_power_integral(1.0, 1.0, 1.5))
        with pytest.raises(InvalidParameterError):
            disk_power_integral(1.0, 1.0, 2.0)
        with pytest.raises(InvalidParameterError):
            disk_power_integral(0.5, 1.0, 1.0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_rim_closed_form_matches_sampling(self, alpha):
        estimate = monte_carlo_disk_integral(1.0, 1.0, alpha, n_points=2 ** 20, seed=0)
        assert disk_power_integral(1.0, 1.0, alpha) == pytest.approx(estimate, rel=1e-3)

    def test_rim_value_for_unit_exponent(self):
        assert disk_power_integral(1.0, 1.0, 1.0) == pytest.approx(4.0, rel=1e-14)
        assert disk_power_integral(2.0, 2.0, 1.0) == pytest.approx(8.0, rel=1e-14)

    def test_just_outside_rim_approaches_rim_value(self):
        rim = disk_power_integral(1.0, 1.0, 1.5)
        assert disk_power_integral(1.0 + 1e-12, 1.0, 1.5) == pytest.approx(rim, rel=1e-4)

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 3.5])
    def test_continuous_across_parametrizations(self, alpha):
        below = disk_power_integral(1.5 * (1.0 - 1e-12), 1.0, alpha)
        above = disk_power_integral(1.5 * (1.0 + 1e-12), 1.0, alpha)
        assert below == pytest.approx(above, rel=1e-9)

    @pytest.mark.parametrize("alpha", [1.5, 3.0])
    def test_near_rim_matches_direct_quadrature(self, alpha):
        closed = disk_power_integral(1.4, 1.0, alpha)
        direct = disk_power_integral_at((1.4, 0.0), 1.0, alpha)
        assert closed == pytest.approx(direct, rel=1e-7)

    def test_thin_strip_converges_to_line(self):
        line = line_power_integral(2.0, 1.0, 1.5)
        errors = [abs(strip_power_integral(2.0, 1.0, 1.5, w) - line) for w in (0.1, 0.01, 0.001)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 1e-4 * line

    def test_qmc_rejects_non_power_of_two(self):
        with pytest.raises(InvalidParameterError):
            monte_carlo_disk_integral(2.0, 1.0, 0.5, n_points=1000, seed=0)


class TestFrontier:
    def test_log_case(self):
        e = math.e
        assert frontier_1d(1.0, 1.0, 1.0, 1.0) == pytest.approx(e / (e - 1.0), rel=1e-10)

    def test_golden_ratio(self):
        assert frontier_1d(1.0, 1.0, 1.0, 2.0) == pytest.approx(GOLDEN_RATIO, rel=1e-10)

    def test_solves_threshold_equation(self):
        x = frontier_1d(2.0, 1.5, 1.0, 1.5)
        assert 1.5 * line_power_integral(x, 2.0, 1.5) == pytest.approx(1.0, rel=1e-10)

    def test_homogeneity(self):
        base = frontier_1d(1.0, 1.0, 1.0, 1.5)
        assert frontier_1d(1.0, 7.0, 7.0, 1.5) == pytest.approx(base, rel=1e-11)

    def test_plane_reaches_farther_than_line(self):
        assert frontier_2d(1.0, 1.0, 1.0, 0.5) > frontier_1d(1.0, 1.0, 1.0, 0.5)

    @pytest.mark.parametrize("alpha", [1.9, 2.0, 2.5, 3.0, 4.0])
    def test_plane_frontier_near_divergent_rim(self, alpha):
        x = frontier_2d(1.0, 1.0, 1.0, alpha)
        assert math.isfinite(x)
        assert x > 1.0
        assert disk_power_integral(x, 1.0, alpha) == pytest.approx(1.0, rel=1e-8)

    def test_line_frontier_for_huge_radius(self):
        R = 2.0 ** 60
        x = frontier_1d(R, 1.0, 1.0, 1.0)
        assert x == pytest.approx(R * math.e / (math.e - 1.0), rel=1e-12)

    def test_stall_below_unit_exponent(self):
        # integral over [0, 1] of (1 - u)^-0.5 is 2, so rho = 0.1 cannot reach tau = 1
        assert frontier_1d(1.0, 0.1, 1.0, 0.5) == 1.0

    def test_rejects_invalid(self):
        with pytest.raises(InvalidParameterError):
            frontier_1d(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(InvalidParameterError):
            frontier_1d(1.0, 1.0, 1.0, 0.0)


class TestGrowth:
    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_line_grows_without_bound(self, alpha):
        state = continuum_growth(1, 1.0, 1.0, alpha, steps=20)
        assert not state.stalled
        assert state.steps == 20
        assert all(inc > 0 for inc in state.increments)
        assert state.final_radius > 10.0 * state.frontier_history[0]

    def test_line_escapes_float_range(self):
        state = continuum_growth(1, 1.0, 1.0, 0.5, steps=20)
        assert state.escaped
        assert not state.stalled
        assert 5 < state.steps < 20
        assert state.final_radius > 1e40
        assert math.isfinite(state.final_radius)
        assert all(b >= a for a, b in zip(state.increments, state.increments[1:]))

    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_plane_runs_all_steps(self, alpha):
        state = continuum_growth(2, 1.0, 1.0, alpha, steps=6)
        assert not state.stalled
        assert not state.escaped
        assert state.steps == 6
        assert all(b >= a * (1.0 - 1e-10) for a, b in zip(state.increments, state.increments[1:]))

    def test_increments_nondecreasing(self):
        state = continuum_growth(1, 1.0, 1.0, 2.0, steps=20)
        increments = np.array(state.increments)
        assert np.all(np.diff(increments) >= -1e-12)
        assert state.final_radius >= 1.0 + 20 * (GOLDEN_RATIO - 1.0) - 1e-9

    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_plane_grows(self, alpha):
        state = continuum_growth(2, 1.0, 1.0, alpha, steps=6)
        assert not state.stalled
        assert np.all(np.diff(state.increments) >= -1e-10)

    def test_small_density_still_grows(self):
        weak = continuum_growth(1, 0.05, 1.0, 1.0, steps=3)
        strong = continuum_growth(1, 1.0, 1.0, 1.0, steps=3)
        assert 0.0 < weak.increments[0] < strong.increments[0]

    def test_stall_is_reported(self):
        state = continuum_growth(1, 0.1, 1.0, 0.5, steps=5)
        assert state.stalled
        assert state.steps == 0
        assert state.final_radius == 1.0

    def test_rows(self):
        state = continuum_growth(1, 1.0, 1.0, 2.0, steps=2)
        rows = state.rows()
        assert [row['step'] for row in rows] == [0, 1, 2]
        assert rows[0]['increment'] is None
        assert rows[1]['R'] == pytest.approx(GOLDEN_RATIO, rel=1e-10)

    def test_rejects_invalid(self):
        with pytest.raises(InvalidParameterError):
            continuum_growth(3, 1.0, 1.0, 1.0, steps=5)
        with pytest.raises(InvalidParameterError):
            continuum_growth(1, 1.0, 1.0, 1.0, steps=0)

    def test_state_requires_increasing_history(self):
        with pytest.raises(InvariantViolationError):
            ContinuumState(dimension=1, rho=1.0, tau=1.0, alpha=1.0,
                           frontier_history=(1.0, 0.5), increments=(-0.5,))
