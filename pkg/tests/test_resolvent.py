import cmath

import numpy as np
import pytest

from gradiplate import (
    Interval,
    ModelParams,
    ResolventRHS,
    mode_matrix,
    mode_resolvent_norm,
    nondiff_limit_check,
    nondiff_sequence,
    resolvent_norm,
    resonant_omega_grid,
    scan_imaginary_axis,
    solve_mode_resolvent,
)


def h_inner(params, lam, x, g):
    """Energy inner product <x, g> on one mode."""
    w = np.array([params.c * lam**2, params.rho, params.a])
    return complex(np.sum(w * x * np.conj(g)))


class TestSolveModeResolvent:
    def test_zero_rhs_zero_solution(self, unit_params):
        out = solve_mode_resolvent(unit_params, 1.0, 0.0, ResolventRHS(0.0, 0.0, 0.0))
        assert (out.u, out.v, out.theta) == (0.0, 0.0, 0.0)

    def test_backsubstitution_residual(self, unit_params):
        rhs = ResolventRHS(1.0, 0.0, 0.0)
        out = solve_mode_resolvent(unit_params, 1.0, 0.0, rhs)
        m = mode_matrix(unit_params, 1.0).entries
        x = np.array([out.u, out.v, out.theta])
        residual = np.linalg.norm(-m @ x - np.array([1.0, 0.0, 0.0]))
        assert residual <= 1e-12

    def test_dissipation_identity_sweep(self):
        """Re<U, G>_H equals (b lam + d lam^2) |theta|^2 for every solve."""
        rng = np.random.default_rng(17)
        for _ in range(100):
            rho, a, b, c, d = rng.uniform(0.2, 4.0, size=5)
            eta = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
            params = ModelParams(rho, a, b, c, d, eta)
            lam = float(rng.uniform(0.3, 40.0))
            omega = float(rng.uniform(-60.0, 60.0))
            g = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            out = solve_mode_resolvent(params, lam, omega, ResolventRHS(*g))
            x = np.array([out.u, out.v, out.theta])
            lhs = h_inner(params, lam, x, g).real
            rhs = (b * lam + d * lam**2) * abs(out.theta) ** 2
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs), 1e-30)

    def test_requires_stable_regime(self):
        params = ModelParams(1, 1, 1, -1.0, 1, 1)
        with pytest.raises(ValueError):
            solve_mode_resolvent(params, 1.0, 0.0, ResolventRHS(1.0, 0.0, 0.0))


class TestResolventNorm:
    def test_zero_frequency_dominated_by_first_mode(self, unit_params, pi_interval):
        total = resolvent_norm(unit_params, pi_interval, 0.0, 16)
        per_block = [
            mode_resolvent_norm(unit_params, float(n * n), 0.0) for n in range(1, 17)
        ]
        assert total == max(per_block)
        assert np.argmax(per_block) == 0
        assert np.isfinite(total)

    def test_sign_symmetry(self, unit_params, pi_interval):
        for omega in (0.5, 3.0, 41.0):
            plus = resolvent_norm(unit_params, pi_interval, omega, 8)
            minus = resolvent_norm(unit_params, pi_interval, -omega, 8)
            assert plus == pytest.approx(minus, rel=1e-12)

    def test_mode_count_monotonicity(self, unit_params, pi_interval):
        for omega in (0.0, 2.0, 10.0, 100.0):
            lo = resolvent_norm(unit_params, pi_interval, omega, 8)
            hi = resolvent_norm(unit_params, pi_interval, omega, 16)
            assert hi >= lo

    def test_bounded_over_wide_sweep(self, unit_params, pi_interval):
        positive = np.geomspace(1e-2, 1e4, 60)
        omegas = np.concatenate([-positive[::-1], [0.0], positive])
        norms = [resolvent_norm(unit_params, pi_interval, float(w), 32) for w in omegas]
        assert np.all(np.isfinite(norms))
        assert max(norms) < 10.0


class TestScan:
    def test_single_point_grid(self, unit_params, pi_interval):
        scan = scan_imaginary_axis(unit_params, pi_interval, [0.0], 4)
        assert scan.norms.shape == (1,)
        assert np.isfinite(scan.norms[0])
        assert scan.sup_norm == scan.tail_min == scan.norms[0]

    def test_matches_pointwise_norm(self, unit_params, pi_interval):
        grid = [0.0, 1.0, 5.0, 25.0]
        scan = scan_imaginary_axis(unit_params, pi_interval, grid, 12)
        for k, omega in enumerate(grid):
            assert scan.norms[k] == pytest.approx(
                resolvent_norm(unit_params, pi_interval, omega, 12), rel=1e-12
            )

    def test_resonant_tail_does_not_vanish(self, unit_params, pi_interval):
        grid = resonant_omega_grid(unit_params, pi_interval, 64, 5.0, 2000.0)
        scan = scan_imaginary_axis(unit_params, pi_interval, grid, 64)
        # tail minimum stays within 10% of the verified asymptotic peak
        assert scan.limit_peak == 2.0
        assert scan.tail_min >= 0.9 * scan.limit_peak

    def test_classical_limit_tail_decays(self, pi_interval):
        """d = 0 restores resolvent decay ~ 1/omega along the resonances."""
        stable = ModelParams.unit()
        classical = ModelParams.unit(d=0.0)
        grid = resonant_omega_grid(stable, pi_interval, 64, 5.0, 2000.0)
        scan = scan_imaginary_axis(classical, pi_interval, grid, 64)
        head = scan.norms[0]
        assert scan.tail_min <= head / 10.0

    def test_mode_count_monotone(self, unit_params, pi_interval):
        grid = np.linspace(1.0, 50.0, 9)
        lo = scan_imaginary_axis(unit_params, pi_interval, grid, 8)
        hi = scan_imaginary_axis(unit_params, pi_interval, grid, 16)
        assert np.all(hi.norms >= lo.norms)


class TestNondiffSequence:
    def test_frozen_values_unit_params(self, unit_params, pi_interval):
        p2 = nondiff_sequence(unit_params, pi_interval, 2)
        assert p2.q == 0.25
        assert p2.norm_v_sq == pytest.approx(1.625, rel=1e-14)
        p3 = nondiff_sequence(unit_params, pi_interval, 3)
        assert p3.norm_v_sq == pytest.approx(8181.0 / 6561.0, rel=1e-14)

    def test_amplitude_system_residuals(self, unit_params, pi_interval):
        for n in range(1, 31):
            point = nondiff_sequence(unit_params, pi_interval, n)
            assert point.alg1_residual <= 1e-12
            assert point.alg2_residual <= 1e-12

    def test_closed_form_agrees_with_direct_solve(self, pi_interval):
        """|v_n|^2 from the closed form equals the resolvent solve at the
        resonant frequency (unit load on the mass-scaled velocity row, i.e.
        abstract right-hand side (0, 1/rho, 0))."""
        params = ModelParams(rho=1.5, a=0.8, b=1.2, c=2.5, d=0.6, eta=-1.1)
        for n in (1, 2, 3, 5, 8):
            point = nondiff_sequence(params, pi_interval, n)
            out = solve_mode_resolvent(
                params, point.lam, point.omega, ResolventRHS(0.0, 1.0 / params.rho, 0.0)
            )
            assert abs(out.u - point.p) <= 1e-10 * max(1.0, abs(point.p))
            assert abs(out.theta - point.q) <= 1e-10 * max(1.0, abs(point.q))
            assert abs(abs(out.v) ** 2 - point.norm_v_sq) <= 1e-10 * point.norm_v_sq
            # v = i omega u for the constructed solution
            assert cmath.isclose(out.v, 1j * point.omega * out.u, rel_tol=1e-9)

    def test_negative_branch_conjugates(self, unit_params, pi_interval):
        plus = nondiff_sequence(unit_params, pi_interval, 4, branch=+1)
        minus = nondiff_sequence(unit_params, pi_interval, 4, branch=-1)
        assert minus.omega == -plus.omega
        assert minus.p == pytest.approx(plus.p.conjugate(), rel=1e-14)
        assert minus.norm_v_sq == pytest.approx(plus.norm_v_sq, rel=1e-14)

    def test_weighted_norm_carries_rho(self, pi_interval):
        params = ModelParams(rho=3.0, a=1.0, b=1.0, c=1.0, d=1.0, eta=1.0)
        point = nondiff_sequence(params, pi_interval, 2)
        assert point.norm_v_sq_weighted == pytest.approx(3.0 * point.norm_v_sq, rel=1e-14)

    def test_norm_u_sq_accumulates_weights(self, unit_params, pi_interval):
        point = nondiff_sequence(unit_params, pi_interval, 2)
        expected = (
            point.lam**2 * abs(point.p) ** 2
            + point.omega**2 * abs(point.p) ** 2
            + point.q**2
        )
        assert point.norm_u_sq == pytest.approx(expected, rel=1e-14)

    def test_eta_zero_rejected(self, pi_interval):
        with pytest.raises(ValueError):
            nondiff_sequence(ModelParams.unit(eta=0.0), pi_interval, 2)


class TestNondiffLimit:
    @pytest.mark.parametrize(
        "d, eta, target",
        [(1.0, 1.0, 1.0), (2.0, 1.0, 4.0), (1.0, 2.0, 0.0625)],
    )
    def test_limit_targets(self, pi_interval, d, eta, target):
        params = ModelParams.unit(d=d, eta=eta)
        report = nondiff_limit_check(params, pi_interval, 30)
        assert report.target == target
        assert report.gap_at_end <= 0.01
        assert report.matching_norm == "l2"

    def test_rectangle_sequence_also_converges(self):
        params = ModelParams.unit()
        report = nondiff_limit_check(params, Interval(1.0), 30)
        assert report.gap_at_end <= 0.01

    def test_n_max_validation(self, unit_params, pi_interval):
        with pytest.raises(ValueError):
            nondiff_limit_check(unit_params, pi_interval, 5)


class TestResonantGrid:
    def test_grid_contents(self, unit_params, pi_interval):
        grid = resonant_omega_grid(unit_params, pi_interval, 10, 3.0, 50.0)
        assert np.array_equal(grid, [4.0, 9.0, 16.0, 25.0, 36.0, 49.0])

    def test_fill_merges_sorted_unique(self, unit_params, pi_interval):
        grid = resonant_omega_grid(unit_params, pi_interval, 10, 3.0, 50.0, fill=7)
        assert np.all(np.diff(grid) > 0)
        assert {4.0, 9.0, 16.0, 25.0, 36.0, 49.0} <= set(grid.tolist())
