import math

import numpy as np
import pytest

from deadcore import (AbsorptionLaw, Disk, Exponents, Interval, Rectangle,
                      ball_extrema, build_grid, field_from_function,
                      gamma_exponent, holder_class, power_problem,
                      validate_problem)
from deadcore.core import DIRICHLET, EXTERIOR, INTERIOR


def test_gamma_examples():
    assert gamma_exponent(2, 0) == pytest.approx(2.0)
    assert gamma_exponent(3, 1) == pytest.approx(3.0)
    assert gamma_exponent(2, 0.2) == pytest.approx(2.5)


def test_gamma_domain_errors():
    with pytest.raises(ValueError):
        gamma_exponent(1.0, 0.0)
    with pytest.raises(ValueError):
        gamma_exponent(2.0, 1.0)  # q = p-1
    with pytest.raises(ValueError):
        gamma_exponent(2.0, -0.1)


def test_gamma_product_identity_sampled():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = rng.uniform(1.1, 10.0)
        q = rng.uniform(0.0, p - 1.0 - 1e-3)
        g = gamma_exponent(p, q)
        assert abs(g * (p - 1.0 - q) - p) <= 1e-12 * p


def test_holder_examples():
    assert holder_class(2, 0.2) == (2, pytest.approx(0.5), True)
    k, beta, classical = holder_class(3, 1)
    assert (k, beta, classical) == (3, pytest.approx(0.0, abs=1e-14), True)
    assert holder_class(2, 0) == (2, pytest.approx(0.0, abs=1e-14), False)


def test_holder_sum_identity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = rng.uniform(1.1, 8.0)
        q = rng.uniform(0.0, p - 1.0 - 1e-3)
        k, beta, _ = holder_class(p, q)
        assert k + beta == gamma_exponent(p, q)


def test_exponents_modes():
    ex = Exponents(2.0, 0.5)
    assert not ex.borderline
    assert ex.gamma == pytest.approx(4.0)
    bl = Exponents(2.0, 1.0)
    assert bl.borderline
    with pytest.raises(ValueError):
        bl.gamma
    with pytest.raises(ValueError):
        Exponents(0.9, 0.0)
    with pytest.raises(ValueError):
        Exponents(2.0, 1.5)


class TestAbsorptionLaw:
    def test_constructor_constraints(self):
        AbsorptionLaw.exp_power(0.5, 0.5)
        with pytest.raises(ValueError):
            AbsorptionLaw.exp_power(0.5, 0.3)  # t < q
        with pytest.raises(ValueError):
            AbsorptionLaw.log_power(1.0, 0.5)
        with pytest.raises(ValueError):
            AbsorptionLaw.power_log(0.5, 0.0)  # t must be positive
        with pytest.raises(ValueError):
            AbsorptionLaw.power_rational(0.5, 1.0, 0.7)  # m > q
        with pytest.raises(ValueError):
            AbsorptionLaw.power_rational(0.5, 1.0, 0.0)  # m must be positive

    @pytest.mark.parametrize("law", [
        AbsorptionLaw.power(0.5),
        AbsorptionLaw.exp_power(0.5, 0.8),
        AbsorptionLaw.log_power(0.5, 0.5),
        AbsorptionLaw.power_log(0.5, 1.0),
        AbsorptionLaw.power_rational(0.5, 1.0, 0.4),
    ])
    def test_zero_and_monotone(self, law):
        assert law.f(0.0) == 0.0
        s = np.linspace(0.0, 2.0, 200)
        fv = law.f(s)
        assert np.all(np.diff(fv) >= -1e-12)

    @pytest.mark.parametrize("law", [
        AbsorptionLaw.exp_power(0.5, 0.8),
        AbsorptionLaw.log_power(0.5, 0.5),
        AbsorptionLaw.power_log(0.5, 1.0),
        AbsorptionLaw.power_rational(0.5, 1.0, 0.4),
    ])
    def test_power_bound_near_zero(self, law):
        # f(s) <= C s^q for 0 < s <= 1 with some finite C
        s = np.logspace(-8, 0, 60)
        ratio = law.f(s) / s ** law.q
        assert np.all(np.isfinite(ratio))
        assert ratio.max() <= 10.0

    def test_primitive_power_closed_form(self):
        law = AbsorptionLaw.power(0.5)
        s = np.array([0.0, 0.3, 1.7])
        assert law.primitive(s) == pytest.approx(s ** 1.5 / 1.5)

    def test_primitive_matches_quadrature(self):
        from scipy.integrate import quad
        for law in (AbsorptionLaw.exp_power(0.5, 0.8),
                    AbsorptionLaw.power_rational(0.5, 1.0, 0.4)):
            for s in (0.2, 1.0, 2.5):
                ref, _ = quad(lambda t: law.f(t), 0.0, s)
                assert law.primitive(s) == pytest.approx(ref, rel=1e-8)


def radial_problem():
    return power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: 0.25)


class TestValidateProblem:
    def test_well_formed(self):
        assert validate_problem(radial_problem()) == []

    def test_negative_lambda_field(self):
        prob = power_problem(2, 0, Interval(-1, 1), lam=lambda x: -1.0,
                             boundary=lambda x: 0.25, lam_bounds=(0.0, 1.0))
        viol = validate_problem(prob)
        assert any(v.field == "lambda" for v in viol)

    def test_borderline_flag_unset(self):
        prob = power_problem(2, 1.0, Interval(-1, 1), 2.0, lambda x: 1.0,
                             borderline=False)
        viol = validate_problem(prob)
        assert any(v.field == "exponents" for v in viol)

    def test_negative_boundary(self):
        prob = power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: -0.1)
        viol = validate_problem(prob)
        assert any(v.field == "boundary" for v in viol)

    def test_weight_outside_declared_bounds(self):
        prob = power_problem(2, 0, Interval(-1, 1), 2.0, lambda x: 0.2,
                             weight=lambda x: 3.0, weight_bounds=(1.0, 2.0))
        viol = validate_problem(prob)
        assert any(v.field == "weight" for v in viol)

    def test_structural_constants(self):
        sc = radial_problem().structural_constants
        assert sc == {"c1": 1.0, "c2": 0.0, "c3": 1.0, "c4": 0.0, "zeta": 1.0}

    def test_absorption_order_mismatch(self):
        from deadcore import Exponents, Problem
        prob = Problem(exponents=Exponents(2, 0.5), dimension=1,
                       domain=Interval(-1, 1), boundary=lambda x: 0.1,
                       absorption=AbsorptionLaw.power(0.3), lam=1.0)
        viol = validate_problem(prob)
        assert any(v.field == "absorption" for v in viol)


class TestGrid:
    def test_interval_grid(self):
        g = build_grid(radial_problem(), 129)
        assert g.shape == (129,)
        assert g.mask[0] == DIRICHLET and g.mask[-1] == DIRICHLET
        assert np.all(g.mask[1:-1] == INTERIOR)
        assert g.values[0] == 0.25

    def test_disk_grid_masking(self):
        prob = power_problem(2, 0, Disk((0.0, 0.0), 1.0), 2.0,
                             lambda x: float(x[0] ** 2))
        g = build_grid(prob, 65)
        pts = g.points()
        rad = np.hypot(pts[..., 0], pts[..., 1])
        assert np.all(g.mask[rad > 1.0 + 1e-9] == EXTERIOR)
        # every interior node is 8-shielded from the exterior
        interior = np.argwhere(g.mask == INTERIOR)
        for i, j in interior[:: max(1, len(interior) // 50)]:
            block = g.mask[i - 1:i + 2, j - 1:j + 2]
            assert block.shape == (3, 3)
            assert np.all(block != EXTERIOR)
        # Dirichlet values equal g at the circle projection
        ring = np.argwhere(g.mask == DIRICHLET)
        i, j = ring[0]
        x = pts[i, j]
        proj = x / np.linalg.norm(x)
        assert g.values[i, j] == pytest.approx(proj[0] ** 2)

    def test_rectangle_grid(self):
        prob = power_problem(2, 0, Rectangle(0, 1, 0, 1), 1.0,
                             lambda x: float(x[0]))
        g = build_grid(prob, 33)
        assert g.shape == (33, 33)
        assert np.all(g.mask[0, :] == DIRICHLET)
        assert g.values[-1, 5] == pytest.approx(1.0)

    def test_values_frozen(self):
        g = build_grid(radial_problem(), 65)
        with pytest.raises(ValueError):
            g.values[3] = 1.0

    def test_interpolate_linear_exact(self):
        fn = lambda x: 2 * x[0] + 3 * x[1]
        prob = power_problem(2, 0, Rectangle(0, 1, 0, 1), 1.0, fn)
        g = field_from_function(prob, 17, fn)
        pts = np.array([[0.31, 0.47], [0.5, 0.99]])
        vals, ok = g.interpolate(pts)
        assert np.all(ok)
        assert vals == pytest.approx(2 * pts[:, 0] + 3 * pts[:, 1])


class TestBallExtrema:
    def test_constant_field(self):
        prob = radial_problem()
        g = field_from_function(prob, 257, lambda x: 3.25)
        be = ball_extrema(g, [0.2], 0.25)
        assert be.sup == be.inf == be.sup_on_sphere == 3.25

    def test_1d_oracle_profile(self):
        prob = radial_problem()
        g = field_from_function(prob, 513,
                                lambda x: max(x[0] - 0.5, 0.0) ** 2)
        be = ball_extrema(g, [0.5], 0.25)
        assert be.sup == pytest.approx(0.0625, abs=3 * g.h)
        assert be.inf == 0.0

    def test_2d_radial_profile(self):
        prob = power_problem(2, 0, Disk((0.0, 0.0), 1.0), 2.0, lambda x: 1.0)
        gam = 2.0
        g = field_from_function(prob, 129,
                                lambda x: float(np.linalg.norm(x)) ** gam)
        for r in (0.25, 0.5):
            be = ball_extrema(g, [0.0, 0.0], r)
            assert be.sup == pytest.approx(r ** gam, abs=4 * g.h)

    def test_monotone_in_radius(self):
        prob = radial_problem()
        g = field_from_function(prob, 257, lambda x: math.sin(3 * x[0]))
        sups, infs = [], []
        for r in (0.1, 0.2, 0.4, 0.8):
            be = ball_extrema(g, [0.1], r)
            sups.append(be.sup)
            infs.append(be.inf)
            assert be.sup >= be.sup_on_sphere
        assert np.all(np.diff(sups) >= 0)
        assert np.all(np.diff(infs) <= 0)

    def test_radius_too_small(self):
        prob = radial_problem()
        g = field_from_function(prob, 129, lambda x: 1.0)
        with pytest.raises(ValueError):
            ball_extrema(g, [0.0], 0.5 * g.h)
