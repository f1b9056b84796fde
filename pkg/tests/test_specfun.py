import math

import numpy as np
import pytest
from scipy import special as sp
from scipy.stats import qmc

from hdhn.specfun import (
    ConvergenceError,
    SpecFunDomainError,
    erfcx,
    hyp2f1_one,
    integral_i0,
    integral_i1,
    upper_inc_gamma,
)
from oracles import i0_quad, i1_quad, upper_gamma_quad

# Frozen from the quadrature oracles in oracles.py.
GAMMA_M05_1 = 0.17814771178156072        # Gamma(-1/2, 1)
I1_A = 2.1716119719777165                # i1_quad(1.5, 1, -0.5, 0.2)
I1_B = 0.2150347101354687                # i1_quad(2, 1, -0.5, 1)
I0_C = 0.6746063450917517                # i0_quad(0.7, 1.3, 3.5)
ERFCX_1 = 0.42758357615580705            # e * erfc(1), erfc by quadrature


class TestHyp2f1One:
    def test_empty_series(self):
        assert hyp2f1_one(2.0, 3.0, 0.0).value == 1.0

    def test_log_identity_at_half(self):
        # 2F1(1,1;2;z) = -ln(1-z)/z
        r = hyp2f1_one(1.0, 2.0, 0.5)
        assert r.value == pytest.approx(-math.log(0.5) / 0.5, rel=1e-12)

    def test_log_identity_negative(self):
        r = hyp2f1_one(1.0, 2.0, -1.0)
        assert r.value == pytest.approx(math.log(2.0), rel=1e-12)

    def test_unit_at_zero_for_valid_parameters(self):
        for b in (-2.5, -1.0, 0.3, 1.0, 4.7):
            for c in (0.2, 1.0, 3.9):
                assert hyp2f1_one(b, c, 0.0).value == 1.0

    def test_domain_errors(self):
        with pytest.raises(SpecFunDomainError):
            hyp2f1_one(1.0, 2.0, 1.0)
        with pytest.raises(SpecFunDomainError):
            hyp2f1_one(1.0, 2.0, 1.5)
        with pytest.raises(SpecFunDomainError):
            hyp2f1_one(1.0, -1.0, 0.3)

    def test_against_scipy_across_regions(self):
        rng = np.random.default_rng(0)
        checked = 0
        for _ in range(3000):
            b = rng.uniform(-3.0, 4.0)
            c = rng.uniform(0.1, 5.0)
            z = rng.uniform(-200.0, 0.999)
            try:
                mine = hyp2f1_one(b, c, z)
            except SpecFunDomainError:
                continue  # near-logarithmic parameter combination
            ref = float(sp.hyp2f1(1.0, b, c, z))
            assert mine.value == pytest.approx(ref, rel=1e-10, abs=1e-13)
            # the reported bound covers the actual deviation
            assert abs(mine.value - ref) <= (mine.abs_error_bound
                                             + 64 * 2.3e-16 * abs(ref))
            checked += 1
        assert checked > 2800

    def test_error_bound_within_contract(self):
        # parameter shapes the network formulas actually use, on their
        # actual argument ranges, for pathloss exponents in (2, 8]
        for alpha in (2.5, 3.0, 4.0, 6.0, 8.0):
            # combined-gain integrals: argument y/(y+nu) in [0, 1);
            # (b, c) = (1, 2/a + 2) unequal-power, (2, 2/a + 3) equal-power
            for b, c in ((1.0, 2.0 / alpha + 2.0), (2.0, 2.0 / alpha + 3.0)):
                for z in (0.0, 0.2, 0.5, 0.7, 0.95):
                    r = hyp2f1_one(b, c, z)
                    assert r.abs_error_bound <= 1e-10 * max(1.0, abs(r.value))
            # power-law tail integrals: argument -1/(zy) < 0
            for z in (-0.2, -1.2, -50.0, -1e4):
                r = hyp2f1_one(1.0 - 2.0 / alpha, 2.0 - 2.0 / alpha, z)
                assert r.abs_error_bound <= 1e-10 * max(1.0, abs(r.value))

    def test_series_iteration_cap(self):
        from hdhn.specfun import _series_2f1_one

        with pytest.raises(ConvergenceError):
            _series_2f1_one(1.0, 2.0, 0.9999999)


class TestUpperIncGamma:
    def test_exponential_case(self):
        assert upper_inc_gamma(1.0, 1.0).value == pytest.approx(
            math.exp(-1.0), rel=1e-12)

    def test_complete_gamma_half(self):
        assert upper_inc_gamma(0.5, 0.0).value == pytest.approx(
            math.sqrt(math.pi), rel=1e-12)

    def test_negative_parameter_frozen_oracle(self):
        assert upper_inc_gamma(-0.5, 1.0).value == pytest.approx(
            GAMMA_M05_1, rel=1e-10)

    def test_negative_parameter_closed_form(self):
        expected = 2.0 * (math.exp(-1.0) - math.sqrt(math.pi) * sp.erfc(1.0))
        assert upper_inc_gamma(-0.5, 1.0).value == pytest.approx(
            expected, rel=1e-10)

    def test_divergent_at_zero(self):
        with pytest.raises(SpecFunDomainError):
            upper_inc_gamma(-0.5, 0.0)
        with pytest.raises(SpecFunDomainError):
            upper_inc_gamma(0.0, 0.0)

    def test_recurrence_grid(self):
        # Gamma(s+1, x) = s Gamma(s, x) + x^s e^(-x)
        for s in np.linspace(-0.9, 3.0, 14):
            for x in np.geomspace(1e-3, 20.0, 12):
                lhs = upper_inc_gamma(s + 1.0, x).value
                rhs = s * upper_inc_gamma(s, x).value + x**s * math.exp(-x)
                assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)

    def test_deep_negative_parameter_against_quadrature(self):
        for s, x in ((-1.5, 0.8), (-2.3, 2.5)):
            assert upper_inc_gamma(s, x).value == pytest.approx(
                upper_gamma_quad(s, x), rel=1e-8)


class TestErfcx:
    def test_at_zero(self):
        assert erfcx(0.0).value == 1.0

    def test_frozen_oracle(self):
        assert erfcx(1.0).value == pytest.approx(ERFCX_1, rel=1e-12)

    def test_large_argument_asymptotic(self):
        # leading term 1/(x sqrt(pi)); the first correction is 1/(2x^2)
        v = erfcx(50.0).value
        lead = 1.0 / (50.0 * math.sqrt(math.pi))
        assert v < lead
        assert abs(v - lead) / lead == pytest.approx(2e-4, rel=0.02)

    def test_strictly_decreasing(self):
        xs = np.geomspace(1e-6, 1e6, 200)
        vals = [erfcx(float(x)).value for x in xs]
        assert all(a > b > 0.0 for a, b in zip(vals, vals[1:]))

    def test_reproduces_erfc(self):
        for x in np.linspace(0.0, 5.0, 26):
            v = erfcx(float(x)).value * math.exp(-x * x)
            assert v == pytest.approx(float(sp.erfc(x)), rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(SpecFunDomainError):
            erfcx(-0.1)


class TestIntegralI1:
    def test_frozen_oracles(self):
        assert integral_i1(1.5, 1.0, -0.5, 0.2).value == pytest.approx(
            I1_A, rel=1e-8)
        assert integral_i1(2.0, 1.0, -0.5, 1.0).value == pytest.approx(
            I1_B, rel=1e-8)

    def test_large_nu_limit(self):
        assert integral_i1(1.5, 2.0, -0.5, 1e8).value < 1e-6

    def test_domain_errors(self):
        with pytest.raises(SpecFunDomainError):
            integral_i1(1.5, -1.0, -0.5, 0.2)
        with pytest.raises(SpecFunDomainError):
            integral_i1(0.3, 1.0, -0.5, 0.2)  # x + z <= 0
        with pytest.raises(SpecFunDomainError):
            integral_i1(1.5, 1.0, -0.5, 0.0)


class TestIntegralI0:
    def test_arctan_reductions(self):
        assert integral_i0(1.0, 1.0, 4.0).value == pytest.approx(
            math.pi / 8.0, rel=1e-10)
        expected = (math.pi / 2.0 - math.atan(2.0)) / 4.0
        assert integral_i0(4.0, 1.0, 4.0).value == pytest.approx(
            expected, rel=1e-10)

    def test_frozen_oracle(self):
        assert integral_i0(0.7, 1.3, 3.5).value == pytest.approx(I0_C, rel=1e-8)

    def test_divergent_tail_rejected(self):
        with pytest.raises(SpecFunDomainError):
            integral_i0(1.0, 1.0, 2.0)
        with pytest.raises(SpecFunDomainError):
            integral_i0(-1.0, 1.0, 4.0)


class TestClosedFormsAgainstQuadrature:
    """Module invariant: closed forms match the defining integrals on a
    quasi-random in-domain parameter cloud."""

    def test_i1_sobol_cloud(self):
        sob = qmc.Sobol(d=4, scramble=True, seed=12345)
        pts = sob.random(512)
        for p in pts:
            x = 0.6 + 2.4 * p[0]
            y = 0.1 + 4.0 * p[1]
            z = -0.9 + 2.0 * p[2]
            nu = 0.1 + 8.0 * p[3]
            if x + z <= 0.2:  # keep the oracle's origin coverage honest
                continue
            mine = integral_i1(x, y, z, nu).value
            ref = i1_quad(x, y, z, nu)
            assert mine == pytest.approx(ref, rel=1e-6)

    def test_i0_sobol_cloud(self):
        sob = qmc.Sobol(d=3, scramble=True, seed=54321)
        pts = sob.random(512)
        for p in pts:
            y = 0.05 + 12.0 * p[0]
            z = 0.1 + 6.0 * p[1]
            nu = 2.2 + 5.0 * p[2]
            mine = integral_i0(y, z, nu).value
            ref = i0_quad(y, z, nu)
            assert mine == pytest.approx(ref, rel=1e-6)
