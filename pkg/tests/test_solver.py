import numpy as np
import pytest

from deadcore import (Interval, Solution, ball_extrema, comparison_check,
                      discrete_energy, field_from_function, harnack_quotient,
                      kkt_measure, power_problem, rescale_solution, solve)
from deadcore.solver import energy_gradient

from _problems import oracle_problem_1d


def exact_1d(pts, r0=0.5, gam=2.0):
    return np.maximum(np.abs(pts) - r0, 0.0) ** gam


class TestDiscreteEnergy:
    def test_zero_field(self):
        prob = power_problem(2, 0, Interval(0, 1), 0.0, lambda x: 0.0)
        g = field_from_function(prob, 33, lambda x: 0.0)
        assert discrete_energy(g, prob) == 0.0

    def test_linear_hand_value(self):
        # u = x on [0,1], h = 1/4, p = 2, lambda = 0: sum of 4*(1/4)*1/2
        prob = power_problem(2, 0, Interval(0, 1), 0.0, lambda x: float(x[0]))
        g = field_from_function(prob, 5, lambda x: float(x[0]))
        assert discrete_energy(g, prob) == pytest.approx(0.5)

    def test_oracle_interpolant_energy_converges(self):
        # J(u) = int (u')^2/2 + lambda*u for the profile, via quadrature
        from scipy.integrate import quad
        prob = oracle_problem_1d(2, 0, 2.0)
        grad_part, _ = quad(lambda x: (2 * max(abs(x) - 0.5, 0.0)) ** 2 / 2,
                            -1, 1)
        absorb, _ = quad(lambda x: 2.0 * max(abs(x) - 0.5, 0.0) ** 2, -1, 1)
        target = grad_part + absorb
        errs = []
        for n in (129, 257, 513):  # h = 1/64, 1/128, 1/256
            g = field_from_function(prob, n, lambda x: exact_1d(x[0]))
            errs.append(abs(discrete_energy(g, prob) - target))
        assert errs[1] < errs[0] and errs[2] < errs[1]

    def test_gradient_matches_finite_differences(self):
        prob = power_problem(2.6, 0.4, Interval(-1, 1), 3.0, lambda x: 0.3)
        g = field_from_function(prob, 33, lambda x: 0.1 + 0.05 * x[0] ** 2)
        grad = energy_gradient(g, prob, at_zero="feasible")
        rng = np.random.default_rng(5)
        for i in rng.integers(1, 32, size=6):
            delta = 1e-7
            up = np.array(g.values)
            dn = np.array(g.values)
            up[i] += delta
            dn[i] -= delta
            fd = (discrete_energy(g.with_values(up), prob)
                  - discrete_energy(g.with_values(dn), prob)) / (2 * delta)
            assert grad[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)

    def test_gradient_matches_finite_differences_2d(self):
        from deadcore import Rectangle
        prob = power_problem(3, 1, Rectangle(0, 1, 0, 1), 2.0,
                             lambda x: 0.5, weight=lambda x: 1.0 + 0.3 * x[0],
                             weight_bounds=(1.0, 1.3))
        g = field_from_function(
            prob, 17, lambda x: 0.2 + 0.1 * x[0] + 0.05 * x[1] ** 2)
        grad = energy_gradient(g, prob, at_zero="feasible")
        rng = np.random.default_rng(6)
        for _ in range(6):
            i, j = rng.integers(1, 16, size=2)
            delta = 1e-7
            up = np.array(g.values)
            dn = np.array(g.values)
            up[i, j] += delta
            dn[i, j] -= delta
            fd = (discrete_energy(g.with_values(up), prob)
                  - discrete_energy(g.with_values(dn), prob)) / (2 * delta)
            assert grad[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-9)


class TestSolve:
    def test_zero_boundary_gives_zero(self):
        prob = power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: 0.0)
        sol = solve(prob, tol=1e-10, resolution=129)
        assert np.all(sol.field.values == 0.0)
        assert sol.energy == 0.0
        assert sol.converged

    def test_matches_closed_form(self, sol_1d_p2q0_h512):
        sol = sol_1d_p2q0_h512
        pts = sol.field.points()[..., 0]
        err = np.max(np.abs(sol.field.values - exact_1d(pts)))
        assert err <= 5e-3
        assert sol.converged
        assert sol.kkt_residual <= sol.tolerance_used

    def test_max_principle(self, sol_1d_p2q0_h256, sol_2d_p2q0_161):
        for sol in (sol_1d_p2q0_h256, sol_2d_p2q0_161):
            ring = sol.field.mask == 1
            assert sol.field.values.max() <= sol.field.values[ring].max() * (1 + 1e-12)

    def test_energy_monotone_across_sweeps(self):
        prob = oracle_problem_1d(2, 0.5, 12.0)
        sol = solve(prob, tol=1e-6, resolution=129, track_energy=True)
        tr = sol.energy_trace
        assert tr is not None and len(tr) > 2
        assert np.all(np.diff(tr) <= 1e-12 * np.abs(tr[:-1]) + 1e-15)

    def test_unique_minimizer_from_different_guesses(self):
        prob = oracle_problem_1d(2, 0, 2.0)
        a = solve(prob, tol=1e-7, resolution=257, initial="boundary")
        b = solve(prob, tol=1e-7, resolution=257, initial="zero")
        assert np.max(np.abs(a.field.values - b.field.values)) <= 10 * 1e-7

    def test_deterministic(self):
        prob = oracle_problem_1d(3, 1, 36.0)
        a = solve(prob, tol=1e-6, resolution=129)
        b = solve(prob, tol=1e-6, resolution=129)
        assert np.array_equal(a.field.values, b.field.values)

    def test_nonconvergence_flagged(self):
        prob = oracle_problem_1d(2, 0, 2.0)
        sol = solve(prob, tol=1e-12, max_iter=3, resolution=257)
        assert not sol.converged

    def test_invalid_problem_rejected(self):
        prob = power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: -1.0)
        with pytest.raises(ValueError):
            solve(prob, resolution=65)

    def test_generalized_absorption_law(self):
        # exp law behaves like s^q near zero: a dead core still forms and
        # the complementarity holds at the stated tolerance
        from deadcore import AbsorptionLaw, Exponents, Problem
        from deadcore.geometry import REGION_DEAD
        from deadcore import extract_regions
        prob = Problem(exponents=Exponents(2, 0.5), dimension=1,
                       domain=Interval(-1, 1), boundary=lambda x: 0.0625,
                       absorption=AbsorptionLaw.exp_power(0.5, 0.5),
                       lam=12.0)
        sol = solve(prob, tol=1e-7, resolution=513)
        assert sol.converged
        reg = extract_regions(sol)
        assert np.sum(reg.classes == REGION_DEAD) > 10
        rep = kkt_measure(sol)
        assert rep.min_value >= -10 * sol.tolerance_used
        assert rep.support_distance <= 2 * sol.field.h

    def test_variable_coefficients(self):
        # non-constant weight and lambda run through the same kernels
        prob = power_problem(
            2, 0, Interval(-1, 1),
            lam=lambda x: 2.0 + np.sin(3 * x[0]) ** 2,
            boundary=lambda x: 0.25,
            weight=lambda x: 1.0 + 0.5 * x[0] ** 2,
            weight_bounds=(1.0, 1.5), lam_bounds=(2.0, 3.0))
        sol = solve(prob, tol=1e-7, resolution=257)
        assert sol.converged
        ring = sol.field.mask == 1
        assert sol.field.values.max() <= sol.field.values[ring].max() * (1 + 1e-12)
        rep = kkt_measure(sol)
        assert rep.min_value >= -10 * sol.tolerance_used

    def test_dirichlet_values_kept_exactly(self, sol_1d_p2q0_h256):
        f = sol_1d_p2q0_h256.field
        assert f.values[0] == 0.25 and f.values[-1] == 0.25


class TestComparison:
    def test_identical_data_empty(self, sol_1d_p2q0_h256):
        rep = comparison_check(sol_1d_p2q0_h256, sol_1d_p2q0_h256, 1e-12)
        assert rep.empty

    def test_nested_boundary_data(self):
        lo = solve(oracle_problem_1d(2, 0, 2.0, r0=0.6), tol=1e-8,
                   resolution=513)
        hi = solve(oracle_problem_1d(2, 0, 2.0, r0=0.5), tol=1e-8,
                   resolution=513)
        rep = comparison_check(lo, hi, 1e-7)
        assert rep.empty
        # the larger solution has the smaller dead core
        from deadcore import extract_regions
        from deadcore.geometry import REGION_DEAD
        dead_lo = extract_regions(lo).classes == REGION_DEAD
        dead_hi = extract_regions(hi).classes == REGION_DEAD
        assert np.all(dead_hi <= dead_lo)

    def test_swapped_arguments_report(self):
        lo = solve(oracle_problem_1d(2, 0, 2.0, r0=0.6), tol=1e-8,
                   resolution=513)
        hi = solve(oracle_problem_1d(2, 0, 2.0, r0=0.5), tol=1e-8,
                   resolution=513)
        rep = comparison_check(hi, lo, 1e-7)
        assert not rep.empty
        idx, u1, u2 = rep.violations[0]
        assert u1 > u2 + rep.tol

    def test_grid_mismatch(self, sol_1d_p2q0_h256, sol_1d_p2q0_h512):
        with pytest.raises(ValueError):
            comparison_check(sol_1d_p2q0_h256, sol_1d_p2q0_h512, 1e-6)


class TestRescale:
    def test_profile_scale_invariance(self, sol_1d_p2q0_h512):
        # at the exact core edge the zoomed profile is y_+^2, r-free
        sol = sol_1d_p2q0_h512
        ys = np.linspace(-1, 1, 9)[:, None]
        for r in (0.25, 0.125):
            v = rescale_solution(sol, [0.5], r)
            vals, ok = v.interpolate(ys)
            assert np.all(ok)
            assert vals == pytest.approx(np.maximum(ys[:, 0], 0.0) ** 2,
                                         abs=1e-2)

    def test_r_equals_h_identity(self, sol_1d_p2q0_h256):
        sol = sol_1d_p2q0_h256
        h = sol.field.h
        v = rescale_solution(sol, [0.5], h)
        # three nodes sampling the immediate neighbourhood
        assert v.shape == (3,)
        i0 = int(round((0.5 - sol.field.origin[0]) / h))
        expect = sol.field.values[i0 + 1] / h ** 2
        assert v.values[2] == pytest.approx(expect, rel=1e-12)

    def test_sup_ratio_definition_chase(self, sol_1d_p2q0_h512):
        sol = sol_1d_p2q0_h512
        x0 = [0.5]
        r = 0.125
        v1 = rescale_solution(sol, x0, r)
        v2 = rescale_solution(sol, x0, 2 * r)
        s1 = v1.values[v1.mask == 0].max()
        s2 = v2.values[v2.mask == 0].max()
        b1 = ball_extrema(sol.field, x0, r).sup
        b2 = ball_extrema(sol.field, x0, 2 * r).sup
        assert s2 / s1 == pytest.approx((b2 / b1) / 2 ** 2, rel=0.05)

    def test_scaling_collapse_under_refinement(self, sol_2d_p2q0_161,
                                               sol_2d_p2q0_321):
        # distance between the r and r/2 zooms shrinks as h does
        probe = np.array([[a, b] for a in (-0.6, -0.2, 0.2, 0.6)
                          for b in (-0.6, -0.2, 0.2, 0.6)])
        dists = []
        for sol in (sol_2d_p2q0_161, sol_2d_p2q0_321):
            va = rescale_solution(sol, [0.5, 0.0], 0.2)
            vb = rescale_solution(sol, [0.5, 0.0], 0.1)
            ia, oka = va.interpolate(probe)
            ib, okb = vb.interpolate(probe)
            dists.append(float(np.max(np.abs(ia - ib)[oka & okb])))
        assert dists[1] < dists[0]

    def test_ball_escapes_domain(self, sol_1d_p2q0_h256):
        with pytest.raises(ValueError):
            rescale_solution(sol_1d_p2q0_h256, [0.9], 0.5)

    def test_borderline_rejected(self):
        from deadcore import borderline_exponential
        prob = power_problem(2, 1.0, Interval(0, 1), 1.0,
                             borderline_exponential(2, 1.0, 1),
                             borderline=True)
        sol = solve(prob, tol=1e-6, resolution=65)
        with pytest.raises(ValueError):
            rescale_solution(sol, [0.5], 0.2)


class TestHarnack:
    def test_constant_positive_no_absorption(self):
        prob = power_problem(2, 0, Interval(-1, 1), 0.0, lambda x: 3.0)
        sol = solve(prob, tol=1e-10, resolution=257)
        assert harnack_quotient(sol, [0.0], 0.25) == pytest.approx(1.0)

    def test_dead_region_zero_by_convention(self, sol_1d_p2q0_h256):
        assert harnack_quotient(sol_1d_p2q0_h256, [0.0], 0.2) == 0.0

    def test_profile_quotient_scale_free(self, sol_1d_p2q0_h512):
        sol = sol_1d_p2q0_h512
        qs = [harnack_quotient(sol, [0.5], 2.0 ** -k) for k in range(2, 7)]
        qs = np.array(qs)
        assert np.all(qs > 0)
        assert qs.max() / qs.min() <= 1.5

    def test_geometry_guard(self, sol_1d_p2q0_h256):
        with pytest.raises(ValueError):
            harnack_quotient(sol_1d_p2q0_h256, [0.8], 0.2)  # B_2r leaves domain


class TestKktMeasure:
    def test_zero_solution(self):
        prob = power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: 0.0)
        sol = solve(prob, tol=1e-9, resolution=129)
        rep = kkt_measure(sol)
        assert np.all(rep.mu == 0.0)
        assert rep.total_mass == 0.0
        assert rep.support_distance == 0.0

    def test_converged_oracle_measure(self, sol_1d_p2q0_h512):
        sol = sol_1d_p2q0_h512
        rep = kkt_measure(sol)
        assert rep.min_value >= -10 * sol.tolerance_used
        assert rep.support_distance <= 2 * sol.field.h
        assert rep.total_mass > 0.0

    def test_detector_flags_broken_node(self, sol_1d_p2q0_h256):
        sol = sol_1d_p2q0_h256
        vals = np.array(sol.field.values)
        i = int(round((0.75 - sol.field.origin[0]) / sol.field.h))
        vals[i] += 0.01
        broken = Solution(field=sol.field.with_values(vals),
                          problem=sol.problem, energy=sol.energy,
                          kkt_residual=sol.kkt_residual,
                          iterations=sol.iterations,
                          tolerance_used=sol.tolerance_used)
        rep = kkt_measure(broken)
        assert rep.min_value < -100 * sol.tolerance_used
