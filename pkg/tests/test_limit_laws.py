"""Analytic limit objects: plug-in anchors, identities, and inverse pairs."""

import math

import numpy as np
import pytest
from scipy import integrate

from heavyedge import limit_laws as ll
from heavyedge.errors import DomainError, InvalidParameterError


class TestOutlierMap:
    def test_values(self):
        assert ll.f_bbp(1.0) == 2.0
        assert ll.f_bbp(2.0) == 2.5
        assert ll.f_bbp(0.5) == 2.0

    def test_inverse(self):
        assert ll.f_inverse(2.5) == pytest.approx(2.0, abs=1e-14)
        assert ll.f_inverse(2.0) == 1.0
        lam = np.linspace(2.0, 10.0, 81)
        assert np.max(np.abs(ll.f_bbp(ll.f_inverse(lam)) - lam)) < 1e-12

    def test_domains(self):
        with pytest.raises(InvalidParameterError):
            ll.f_bbp(0.0)
        with pytest.raises(InvalidParameterError):
            ll.f_inverse(1.9)


class TestFrechet:
    def test_plugin_value(self):
        assert ll.frechet_cdf(1.0, 2.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_limits_and_quantile_roundtrip(self):
        assert ll.frechet_cdf(1e9, 2.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert ll.frechet_cdf(-1.0, 2.0, 1.0) == 0.0
        x = np.linspace(1.0, 6.0, 50)  # below ~0.5 the cdf underflows to 0
        u = ll.frechet_cdf(x, 3.0, 0.5)
        assert np.max(np.abs(ll.frechet_quantile(u, 3.0, 0.5) - x)) < 1e-10

    def test_lambda1_cdf_atom_and_composition(self):
        law = ll.DeformedFrechetEdgeLaw(2.0, 1.0)
        assert law.atom_mass == pytest.approx(math.exp(-1.0), rel=1e-14)
        assert law.cdf(1.99) == 0.0
        assert law.cdf(2.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
        # composition of the two formulas: f_inverse(2.5) = 2, exponent c x^-4 / 2
        assert law.cdf(2.5) == pytest.approx(math.exp(-2.0 * 2.0**-4 / 2.0), rel=1e-12)
        t = np.linspace(1.0, 12.0, 500)
        vals = law.cdf(t)
        assert np.all(np.diff(vals) >= -1e-15)

    def test_deformed_quantile_generalized_inverse(self):
        law = ll.DeformedFrechetEdgeLaw(4.0, 1.0)
        assert law.quantile(0.5 * law.atom_mass) == 2.0
        for u in [0.3, 0.6, 0.9]:
            if u > law.atom_mass:
                assert law.cdf(law.quantile(u)) == pytest.approx(u, rel=1e-10)

    def test_poisson_frechet_duality(self):
        x = np.linspace(0.2, 9.0, 200)
        for c, mu in [(2.0, 1.0), (4.0, 0.5)]:
            lhs = np.exp(-np.array([ll.poisson_expected_count(xi, c, mu) for xi in x]))
            rhs = ll.frechet_cdf(x, c, mu)
            assert np.max(np.abs(lhs - rhs)) < 1e-14

    def test_expected_count_values(self):
        assert ll.poisson_expected_count(1.0, 2.0, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert ll.poisson_expected_count(1e8, 2.0, 1.0) < 1e-30
        # antiderivative check of the intensity integral
        val, _ = integrate.quad(lambda x: ll.poisson_intensity(x, 2.0, 1.0), 1.3, np.inf)
        assert val == pytest.approx(ll.poisson_expected_count(1.3, 2.0, 1.0), rel=1e-9)

    def test_simulated_process_mean_count(self):
        rng = np.random.default_rng(5)
        pts = ll.simulate_poisson_topk(rng, 2.0, 1.0, 4, 200000)
        assert pts.shape == (200000, 4)
        assert np.all(np.diff(pts, axis=1) <= 1e-15)
        # P(zeta_1 <= x) = frechet_cdf; compare at one point
        x = 1.5
        emp = np.mean(pts[:, 0] <= ll.f_bbp(x))
        assert emp == pytest.approx(ll.frechet_cdf(x, 2.0, 1.0), abs=0.005)


class TestMarchenkoPastur:
    def test_density_mass_one(self):
        for alpha in (1.0, 2.0, 3.5):
            a, b = ll.mp_edges(alpha)
            mass, _ = integrate.quad(lambda x: ll.mp_density(x, alpha), a, b, limit=200)
            assert mass == pytest.approx(1.0, abs=1e-10)

    def test_reciprocal_mass(self):
        a, b = ll.mp_edges(0.5)
        mass, _ = integrate.quad(lambda x: ll.mp_density(x, 0.5), a, b, limit=200)
        assert mass == pytest.approx(0.5, abs=1e-10)

    def test_stieltjes_anchor(self):
        assert ll.mp_stieltjes(4.0, 1.0, method="quadrature") == pytest.approx(0.5, abs=1e-8)
        assert ll.mp_stieltjes(4.0, 1.0, method="closed") == pytest.approx(0.5, abs=1e-14)

    def test_stieltjes_identity_alpha_one(self):
        z = np.linspace(1.5, 5.0, 71)
        got = 2.0 * z * np.array(
            [ll.mp_stieltjes(2.0 * zz * zz, 1.0, method="quadrature") for zz in z]
        )
        want = z - np.sqrt(z * z - 2.0)
        assert np.max(np.abs(got - want)) < 1e-6

    def test_closed_matches_quadrature(self):
        for alpha in (0.5, 1.0, 2.0, 4.0):
            _, b = ll.mp_edges(alpha)
            z = np.linspace(b, b + 30.0, 50)
            q = np.array([ll.mp_stieltjes(zz, alpha, method="quadrature", nodes=400) for zz in z])
            c = ll.mp_stieltjes(z, alpha, method="closed")
            assert np.max(np.abs(q - c)) < 1e-8

    def test_quadrature_oracle_for_transform(self):
        # direct adaptive quadrature of the defining integral as the oracle
        for alpha, z in [(2.0, 7.0), (1.0, 4.5), (0.5, 4.0)]:
            a, b = ll.mp_edges(alpha)
            oracle, _ = integrate.quad(
                lambda x: ll.mp_density(x, alpha) / (z - x), a, b, limit=400
            )
            assert ll.mp_stieltjes(z, alpha) == pytest.approx(oracle, abs=1e-8)

    def test_inside_support_rejected(self):
        with pytest.raises(DomainError):
            ll.mp_stieltjes(3.0, 1.0)

    def test_transform_decreasing(self):
        _, b = ll.mp_edges(2.0)
        z = np.linspace(b, b + 20.0, 100)
        vals = ll.mp_stieltjes(z, 2.0)
        assert np.all(np.diff(vals) < 0.0)


class TestOutlierCurve:
    def test_tau_one(self):
        assert ll.tau_alpha(1.0) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)

    def test_tau_matches_closed_form(self):
        for alpha in (1.0, 1.5, 2.0, 4.0, 9.0):
            assert ll.tau_alpha(alpha) == pytest.approx(ll.tau_alpha_closed(alpha), abs=1e-8)

    def test_tau_continuous_and_positive(self):
        alphas = np.linspace(1.0, 6.0, 60)
        taus = np.array([ll.tau_alpha(a) for a in alphas])
        assert np.all(taus > 0.0)
        assert np.max(np.abs(np.diff(taus))) < 0.02

    def test_alpha_one_closed_form(self):
        for a in (0.75, 1.0, 2.0, 5.0):
            assert ll.f_alpha(a, 1.0) == pytest.approx(a + 1.0 / (2.0 * a), abs=1e-8)

    def test_subcritical_branch(self):
        edge = (1.0 + math.sqrt(2.0)) / math.sqrt(3.0)
        assert ll.f_alpha(0.5, 2.0) == edge
        assert ll.f_alpha(1e-3, 2.0) == edge

    def test_equation_residual(self):
        for alpha, x in [(1.0, 1.3), (2.0, 1.2), (3.0, 0.9), (2.0, 5.0)]:
            z = ll.f_alpha(x, alpha)
            assert abs(ll.falpha_equation_lhs(z, alpha) - 1.0 / x**2) < 1e-9

    def test_lhs_decreasing(self):
        ze = ll.covariance_edge_z(2.0)
        z = np.linspace(ze * (1 + 1e-9), ze + 10.0, 200)
        vals = np.array([ll.falpha_equation_lhs(zz, 2.0) for zz in z])
        assert np.all(np.diff(vals) < 0.0)

    def test_monotone_in_x(self):
        xs = np.linspace(0.2, 6.0, 80)
        vals = np.array([ll.f_alpha(x, 2.0) for x in xs])
        assert np.all(np.diff(vals) >= -1e-12)

    def test_closed_form_oracle_agreement(self):
        for alpha in (1.0, 2.0, 3.0):
            for x in (0.9, 1.2, 2.5, 6.0):
                if x <= ll.tau_alpha_closed(alpha):
                    continue
                assert ll.f_alpha(x, alpha) == pytest.approx(
                    ll.f_alpha_closed(x, alpha), abs=1e-8
                )

    def test_alpha_below_one_rejected(self):
        with pytest.raises(InvalidParameterError):
            ll.f_alpha(1.0, 0.5)

    def test_super_poly_limit(self):
        from heavyedge.tail_laws import SuperPolyTail

        assert ll.super_poly_limit(SuperPolyTail(a=2.0)) == 2.5
        assert ll.super_poly_limit(SuperPolyTail(a=1.0 + 1e-9)) == pytest.approx(2.0, abs=1e-8)


class TestCovarianceEdgeLaw:
    def test_zero_below_edge_and_atom(self):
        law = ll.CovarianceEdgeLaw(2.0, 2.0)
        b = (1.0 + math.sqrt(2.0)) ** 2
        assert law.cdf(b - 1e-6) == 0.0
        assert law.cdf_left(b) == 0.0
        # atom mass P(xi <= tau): tau^-4 = (1+alpha)^2/alpha makes it exp(-c)
        assert law.atom_mass == pytest.approx(math.exp(-2.0), abs=1e-8)

    def test_cdf_monotone_to_one(self):
        law = ll.CovarianceEdgeLaw(1.5, 2.0)
        t = np.linspace(5.0, 80.0, 300)
        vals = law.cdf(t)
        assert np.all(np.diff(vals) >= -1e-12)
        assert law.cdf(5e4) > 0.999

    def test_quantile_roundtrip(self):
        law = ll.CovarianceEdgeLaw(2.0, 2.0)
        for u in (0.3, 0.6, 0.95):
            if u <= law.atom_mass:
                continue
            assert law.cdf(law.quantile(u)) == pytest.approx(u, rel=1e-7)

    def test_pushforward_consistency_with_falpha(self):
        # P(law <= (1+alpha) F(x)^2) should equal P(xi <= x) above tau
        law = ll.CovarianceEdgeLaw(2.0, 2.0)
        for x in (0.9, 1.2, 2.0):
            t = 3.0 * ll.f_alpha(x, 2.0) ** 2
            want = math.exp(-2.0 * 2.0 * x**-4 / 9.0)
            assert law.cdf(t) == pytest.approx(want, rel=1e-7)
