import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrenyi import specfun
from wrenyi.errors import DomainError, PoleError

# reference values computed with mpmath at 40 digits, then frozen
GAMMA_REF = [
    (0.1, 9.5135076986687312858),
    (0.5, 1.7724538509055160273),
    (1.5, 0.88622692545275801365),
    (3.7, 4.1706517837966040301),
    (10.25, 639232.59877957679428),
    (42.0, 3.3452526613163807108e49),
    (120.5, 6.1002949740240058744e197),
]
LGAMMA_REF = [
    (0.1, 2.252712651734205902),
    (3.7, 1.4280723266653881292),
    (10.25, 13.368023671476046295),
    (120.5, 455.41760044623451043),
]
DIGAMMA_REF = [
    (0.05, -20.497844991299869257),
    (0.5, -1.9635100260214234794),
    (1.0, -0.57721566490153286061),
    (3.7, 1.1671535393615114409),
    (12.5, 2.4851956512749120482),
    (1000.0, 6.9072551956488120521),
    (1e6, 13.815510057964190771),
]
TRIGAMMA_REF = [
    (0.05, 401.53235734211507489),
    (0.5, 4.9348022005446793094),
    (3.7, 0.31003785767003830216),
    (12.5, 0.083285224601578370444),
    (1000.0, 0.0010005001666666333334),
]
BESSEL_K_REF = [
    (0.5, 2.0, 0.11993777196806144737),
    (1.3, 0.7, 1.4232613423144328745),
    (0.0, 1.0, 0.42102443824070833334),
    (2.5, 10.0, 0.000023931325864627888879),
    (7.2, 3.3, 9.3505593738547764312),
    (25.0, 40.0, 1.5218993727352768117e-15),
    (0.75, 1e-3, 183.23463852175821642),
]
BESSEL_J_REF = [
    (1.0, 3.0, 0.33905895852593645893),
    (2.5, 4.0, 0.44088497455734116552),
    (0.5, 0.3, 0.43049351732812455754),
    (10.0, 12.0, 0.30047603527126931073),
]
J0_FIRST_ZERO = 2.4048255576957727686


class TestGamma:
    @pytest.mark.parametrize("x, expected", GAMMA_REF)
    def test_reference_values(self, x, expected):
        np.testing.assert_allclose(specfun.gamma(x), expected, rtol=1e-12)

    @pytest.mark.parametrize("x, expected", LGAMMA_REF)
    def test_lgamma_reference(self, x, expected):
        np.testing.assert_allclose(specfun.lgamma(x), expected, rtol=1e-12)

    def test_factorials(self):
        assert specfun.gamma(1.0) == 1.0
        assert specfun.gamma(5.0) == 24.0

    def test_half(self):
        np.testing.assert_allclose(specfun.gamma(0.5), math.sqrt(math.pi), rtol=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles(self, x):
        with pytest.raises(PoleError):
            specfun.gamma(x)
        with pytest.raises(PoleError):
            specfun.lgamma(x)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            specfun.gamma(200.0)

    def test_negative_non_integer(self):
        # reflection: Gamma(-0.5) = -2 sqrt(pi)
        np.testing.assert_allclose(specfun.gamma(-0.5), -2 * math.sqrt(math.pi), rtol=1e-13)

    def test_vectorized(self):
        x = np.array([0.5, 1.0, 5.0])
        np.testing.assert_allclose(specfun.gamma(x), [math.sqrt(math.pi), 1.0, 24.0], rtol=1e-13)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 50.0))
    def test_recurrence(self, x):
        np.testing.assert_allclose(specfun.gamma(x + 1), x * specfun.gamma(x), rtol=1e-11)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.1, 150.0))
    def test_lgamma_matches_math(self, x):
        np.testing.assert_allclose(specfun.lgamma(x), math.lgamma(x), rtol=1e-12, atol=1e-13)


class TestDigamma:
    @pytest.mark.parametrize("x, expected", DIGAMMA_REF)
    def test_reference_values(self, x, expected):
        np.testing.assert_allclose(specfun.digamma(x), expected, rtol=0, atol=1e-12)

    def test_recurrence_example(self):
        np.testing.assert_allclose(specfun.digamma(4.7) - specfun.digamma(3.7), 1 / 3.7, atol=1e-13)

    def test_two(self):
        np.testing.assert_allclose(specfun.digamma(2.0), specfun.digamma(1.0) + 1, atol=1e-14)

    @pytest.mark.parametrize("x", [0.0, -3.0])
    def test_poles(self, x):
        with pytest.raises(PoleError):
            specfun.digamma(x)

    def test_reflection(self):
        # psi(1-x) - psi(x) = pi cot(pi x)
        for x in (0.2, 0.45, 0.7):
            np.testing.assert_allclose(
                specfun.digamma(1 - x) - specfun.digamma(x), math.pi / math.tan(math.pi * x), atol=1e-12
            )

    def test_derivative_of_lgamma(self):
        for x in np.linspace(0.3, 40, 25):
            h = 1e-5 * max(1.0, x)
            fd = (specfun.lgamma(x + h) - specfun.lgamma(x - h)) / (2 * h)
            np.testing.assert_allclose(specfun.digamma(x), fd, atol=1e-6)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-3, 1e5))
    def test_recurrence_property(self, x):
        np.testing.assert_allclose(specfun.digamma(x + 1) - specfun.digamma(x), 1 / x, rtol=1e-10, atol=1e-12)


class TestTrigamma:
    @pytest.mark.parametrize("x, expected", TRIGAMMA_REF)
    def test_reference_values(self, x, expected):
        np.testing.assert_allclose(specfun.trigamma(x), expected, rtol=1e-12, atol=1e-10)

    def test_one(self):
        np.testing.assert_allclose(specfun.trigamma(1.0), math.pi**2 / 6, atol=1e-12)

    def test_recurrence_example(self):
        np.testing.assert_allclose(specfun.trigamma(2.0) - specfun.trigamma(3.0), 0.25, atol=1e-12)

    def test_finite_difference_at_ten(self):
        # h-sweep: the central difference converges towards trigamma(10)
        errs = []
        for h in (1e-2, 1e-3, 1e-4):
            fd = (specfun.digamma(10 + h) - specfun.digamma(10 - h)) / (2 * h)
            errs.append(abs(fd - specfun.trigamma(10.0)))
        assert errs[-1] < 1e-8
        assert errs[1] < errs[0]

    def test_pole(self):
        with pytest.raises(PoleError):
            specfun.trigamma(-2.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1e-2, 1e4), st.floats(1e-3, 10.0))
    def test_positive_decreasing(self, x, dx):
        a, b = specfun.trigamma(x), specfun.trigamma(x + dx)
        assert a > 0 and b > 0
        assert b < a


class TestBeta:
    def test_symmetric_and_known(self):
        np.testing.assert_allclose(specfun.beta(2.0, 3.0), 1 / 12, rtol=1e-13)
        np.testing.assert_allclose(specfun.beta(0.5, 0.5), math.pi, rtol=1e-13)
        np.testing.assert_allclose(specfun.lbeta(3.3, 1.7), specfun.lbeta(1.7, 3.3), rtol=1e-14)


class TestBesselK:
    @pytest.mark.parametrize("lam, z, expected", BESSEL_K_REF)
    def test_reference_values(self, lam, z, expected):
        np.testing.assert_allclose(specfun.bessel_k(lam, z), expected, rtol=1e-9)

    @pytest.mark.parametrize("lam, z, expected", BESSEL_K_REF)
    def test_quadrature_route(self, lam, z, expected):
        res = specfun.bessel_k_quad(lam, z)
        np.testing.assert_allclose(res.value, expected, rtol=1e-9)
        assert res.abs_error_bound >= 0

    def test_half_integer_closed_form(self):
        z = 2.0
        np.testing.assert_allclose(
            specfun.bessel_k_quad(0.5, z).value, math.sqrt(math.pi / (2 * z)) * math.exp(-z), rtol=1e-9
        )

    def test_symmetry_example(self):
        np.testing.assert_allclose(specfun.bessel_k(1.3, 0.7), specfun.bessel_k(-1.3, 0.7), rtol=1e-10)
        np.testing.assert_allclose(specfun.bessel_k_quad(1.3, 0.7).value, specfun.bessel_k_quad(-1.3, 0.7).value, rtol=1e-10)

    def test_small_z_asymptote(self):
        z = 1e-4
        np.testing.assert_allclose(specfun.bessel_k(2.0, z), specfun.gamma(2.0) * 2.0 * z**-2, rtol=1e-3)

    @pytest.mark.parametrize("z", [0.0, -1.0])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            specfun.bessel_k(1.0, z)
        with pytest.raises(DomainError):
            specfun.bessel_k_quad(1.0, z)

    def test_scaled_power_limit(self):
        # K_lam(z) z^lam -> Gamma(lam) 2^(lam-1) as z -> 0
        lam = 1.7
        limit = specfun.gamma(lam) * 2 ** (lam - 1)
        np.testing.assert_allclose(specfun.bessel_k_scaled_power(lam, 0.0), limit, rtol=1e-13)
        np.testing.assert_allclose(specfun.bessel_k_scaled_power(lam, 1e-6), limit, rtol=1e-6)
        np.testing.assert_allclose(specfun.bessel_k_scaled_power(lam, 2.0), specfun.bessel_k(lam, 2.0) * 2.0**lam, rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-30.0, 30.0), st.floats(1e-3, 50.0))
    def test_symmetry_property(self, lam, z):
        np.testing.assert_allclose(specfun.bessel_k(lam, z), specfun.bessel_k(-lam, z), rtol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 20.0), st.floats(1e-2, 30.0))
    def test_routes_agree(self, lam, z):
        np.testing.assert_allclose(specfun.bessel_k_quad(lam, z).value, specfun.bessel_k(lam, z), rtol=1e-8)


class TestBesselJ:
    @pytest.mark.parametrize("order, z, expected", BESSEL_J_REF)
    def test_reference_values(self, order, z, expected):
        np.testing.assert_allclose(specfun.bessel_j(order, z), expected, rtol=1e-10)
        np.testing.assert_allclose(specfun.bessel_j_quad(order, z).value, expected, rtol=1e-9, atol=1e-12)

    def test_origin(self):
        assert specfun.bessel_j(0.0, 0.0) == 1.0
        assert specfun.bessel_j(1.0, 0.0) == 0.0
        assert specfun.bessel_j_quad(0.0, 0.0).value == 1.0

    def test_first_zero(self):
        assert abs(specfun.bessel_j(0.0, J0_FIRST_ZERO)) < 1e-12
        assert abs(specfun.bessel_j_quad(0.0, J0_FIRST_ZERO).value) < 1e-10

    @pytest.mark.parametrize("order", [0, 1, 2, 5])
    def test_integer_orders_match_integral(self, order):
        for z in np.linspace(-8, 8, 9):
            np.testing.assert_allclose(
                specfun.bessel_j_quad(order, z).value, specfun.bessel_j(order, z), rtol=1e-9, atol=1e-12
            )

    def test_negative_argument_non_integer_order(self):
        with pytest.raises(DomainError):
            specfun.bessel_j(0.5, -1.0)


class TestRegistry:
    def test_every_function_callable(self):
        for name, fn in specfun.FUNCTIONS.items():
            args = (1.5,) if name in ("gamma", "lgamma", "digamma", "trigamma") else (1.5, 2.0)
            assert math.isfinite(fn(*args)), name
