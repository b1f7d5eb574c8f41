"""Oracle tests for the special-function layer.

Reference values are frozen from independent computations: textbook
identities (half-integer Bessel, exponential CDF), standard normal tables,
and a brute-force Monte Carlo estimate for the Gamma-mixture fractional
moment.  Tolerances reflect how each reference was produced.
"""

import math

import numpy as np
import pytest

from ambc_detect.specfun import (
    DEFAULT_QUADRATURE,
    GammaDistParams,
    QuadratureSpec,
    bessel_k,
    gamma_cdf,
    gamma_cdf_inverse,
    mcleish_abs_moment,
    q_function,
    q_inverse,
)


class TestGaussianTail:
    def test_q_at_zero_is_half(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_table_value(self):
        # standard normal table: Q(1.2816) ~ 0.1000
        assert q_function(1.2816) == pytest.approx(0.10, abs=1e-4)

    def test_inverse_table_value(self):
        assert q_inverse(0.05) == pytest.approx(1.6448536, abs=1e-6)

    def test_round_trip(self):
        for p in (1e-6, 0.01, 0.3, 0.5, 0.9, 1 - 1e-6):
            assert q_function(q_inverse(p)) == pytest.approx(p, rel=1e-10)

    def test_symmetry(self):
        assert q_function(-1.7) == pytest.approx(1.0 - q_function(1.7), rel=1e-12)

    def test_vectorized(self):
        x = np.array([-1.0, 0.0, 2.5])
        out = q_function(x)
        assert out.shape == x.shape
        assert np.all(np.diff(out) < 0)


class TestGammaCdf:
    def test_exponential_special_case(self):
        # shape 1 is exponential: F(x) = 1 - exp(-x/scale)
        params = GammaDistParams(shape=1.0, scale=2.0)
        assert gamma_cdf(3.0, params) == pytest.approx(1.0 - math.exp(-1.5), rel=1e-12)

    def test_inverse_round_trip(self):
        params = GammaDistParams(shape=3.7, scale=0.9)
        for p in (0.01, 0.27, 0.73, 0.99):
            assert gamma_cdf(gamma_cdf_inverse(p, params), params) == pytest.approx(p, rel=1e-9)

    def test_monotone_in_x(self):
        params = GammaDistParams(shape=2.2, scale=1.3)
        xs = np.linspace(0.1, 12.0, 40)
        cdf = np.array([gamma_cdf(x, params) for x in xs])
        assert np.all(np.diff(cdf) > 0)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            GammaDistParams(shape=0.0, scale=1.0)


class TestBesselK:
    def test_half_order_closed_form(self):
        # K_{1/2}(x) = sqrt(pi / (2x)) exp(-x)
        for x in (0.5, 1.0, 3.0):
            expect = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
            assert bessel_k(0.5, x) == pytest.approx(expect, rel=1e-12)

    def test_order_zero_reference(self):
        # Abramowitz & Stegun 9.8: K_0(2) = 0.1138938727...
        assert bessel_k(0.0, 2.0) == pytest.approx(0.11389387274953, rel=1e-10)

    def test_decays_in_x(self):
        xs = np.linspace(0.5, 6.0, 20)
        vals = np.array([bessel_k(1.0, x) for x in xs])
        assert np.all(np.diff(vals) < 0)


class TestMixtureMoment:
    """E|v|^p for v = signal + Gamma-mixture noise, CN signal convention."""

    def test_second_moment_is_total_power(self):
        # p = 2 must give S + sigma^2 exactly, for every mixture shape
        for q in (0.5, 1.0, 2.0, 10.0, 1e4):
            assert mcleish_abs_moment(2.0, q, 3.0, 0.5) == pytest.approx(3.5, rel=1e-9)

    def test_fourth_moment_closed_form(self):
        # E|v|^4 = 2 (S^2 + 2 S sigma^2 + sigma^4 (1 + 1/q))
        s_pow, nv, q = 0.7, 0.4, 1.5
        expect = 2.0 * (s_pow**2 + 2.0 * s_pow * nv + nv**2 * (1.0 + 1.0 / q))
        assert mcleish_abs_moment(4.0, q, s_pow, nv) == pytest.approx(expect, rel=1e-12)

    def test_even_order_quadrature_agrees_with_closed_form(self):
        closed = mcleish_abs_moment(4.0, 1.5, 0.7, 0.4, method="closed-form")
        quad = mcleish_abs_moment(4.0, 1.5, 0.7, 0.4, method="quadrature")
        assert quad == pytest.approx(closed, rel=1e-8)

    def test_fractional_order_against_monte_carlo(self):
        # frozen from 4e6 draws of sqrt(G)*CN noise plus CN signal
        # (p=1.3, q=1.5, S=0.7, sigma^2=0.4): 0.948932 +- 0.000332
        got = mcleish_abs_moment(1.3, 1.5, 0.7, 0.4)
        assert got == pytest.approx(0.948932, abs=3 * 0.000332)

    def test_large_shape_recovers_gaussian_envelope(self):
        # q -> inf collapses the mixture; E|w|^p -> Gamma(p/2+1) sigma^p
        for p in (0.5, 1.3, 3.7):
            limit = math.gamma(p / 2.0 + 1.0) * 0.4 ** (p / 2.0)
            got = mcleish_abs_moment(p, 1e4, 0.0, 0.4)
            assert got == pytest.approx(limit, rel=5e-3)

    def test_laplacian_shape_noise_only(self):
        # q = 1 mixes over an exponential: E|w|^p = Gamma(p/2+1) Gamma(1+p/2) sigma^p
        p, nv = 1.0, 1.0
        expect = math.gamma(p / 2.0 + 1.0) * math.gamma(1.0 + p / 2.0)
        assert mcleish_abs_moment(p, 1.0, 0.0, nv) == pytest.approx(expect, rel=1e-8)

    def test_closed_form_rejects_fractional_order(self):
        with pytest.raises(ValueError):
            mcleish_abs_moment(1.3, 1.0, 0.0, 1.0, method="closed-form")

    def test_rejects_nonpositive_order(self):
        with pytest.raises(ValueError):
            mcleish_abs_moment(0.0, 1.0, 0.0, 1.0)

    def test_tight_spec_still_converges(self):
        spec = QuadratureSpec(
            abs_tol=DEFAULT_QUADRATURE.abs_tol,
            rel_tol=DEFAULT_QUADRATURE.rel_tol,
            max_subdivisions=DEFAULT_QUADRATURE.max_subdivisions,
            tail_mass=DEFAULT_QUADRATURE.tail_mass,
        )
        val = mcleish_abs_moment(0.5, 0.5, 0.0, 1.0, spec=spec)
        assert math.isfinite(val) and val > 0.0
