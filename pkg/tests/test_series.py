import math

import numpy as np
import pytest

from weldlab.errors import InvalidInput, NumericalFailure
from weldlab.series import (
    ComplexSeries,
    Kind,
    coeffs_from_samples,
    compose,
    derivative,
    evaluate,
    log_ratio,
    multiply,
    samples_from_coeffs,
)


def taylor(*coeffs):
    return ComplexSeries.taylor(list(coeffs))


class TestMultiply:
    def test_polynomial_identity(self):
        # (1 + z)(1 - z) = 1 - z^2 at order 3
        out = multiply(taylor(1, 1, 0), taylor(1, -1, 0))
        assert np.allclose(out.coeffs, [1, 0, -1])

    def test_multiplicative_identity(self):
        a = taylor(0.3, 1.0, -2.0, 0.25)
        out = multiply(a, taylor(1, 0, 0, 0))
        assert np.allclose(out.coeffs, a.coeffs)

    def test_exponential_square(self):
        # (sum z^k/k!)^2 has the coefficients of e^{2z}
        n = 6
        e = taylor(*[1.0 / math.factorial(k) for k in range(n)])
        out = multiply(e, e)
        expected = [2.0 ** k / math.factorial(k) for k in range(n)]
        assert np.abs(out.coeffs - expected).max() <= 1e-13

    def test_kind_mismatch_rejected(self):
        with pytest.raises(InvalidInput):
            multiply(taylor(1, 2), ComplexSeries.laurent([1, 0]))

    def test_laurent_product_rejected(self):
        g = ComplexSeries.laurent([1, 0, 0.5])
        with pytest.raises(InvalidInput):
            multiply(g, g)

    def test_product_rule(self):
        # d(ab) = da b + a db, coefficient-wise within 1e-13
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = taylor(*(rng.standard_normal(8) + 1j * rng.standard_normal(8)))
            b = taylor(*(rng.standard_normal(8) + 1j * rng.standard_normal(8)))
            lhs = derivative(multiply(a, b))
            rhs_coeffs = (np.convolve(derivative(a).coeffs, b.coeffs)
                          + np.convolve(a.coeffs, derivative(b).coeffs))[:lhs.order]
            assert np.abs(lhs.coeffs - rhs_coeffs).max() <= 1e-13 * max(
                1.0, np.abs(rhs_coeffs).max())


class TestCompose:
    def test_hand_expansion(self):
        # z^2 composed with z + z^2 -> z^2 + 2 z^3 + z^4
        out = compose(taylor(0, 0, 1, 0, 0), taylor(0, 1, 1, 0, 0))
        assert np.allclose(out.coeffs, [0, 0, 1, 2, 1])

    def test_identity_outer(self):
        a = taylor(0, 1, 0.5, -0.25)
        out = compose(taylor(0, 1, 0, 0), a)
        assert np.allclose(out.coeffs, a.coeffs)

    def test_log_scaled_argument(self):
        # log(1+w) at w = t z: coefficients (-1)^{k+1} t^k / k
        t = 0.3
        n = 8
        logw = taylor(*([0] + [(-1) ** (k + 1) / k for k in range(1, n)]))
        tz = taylor(*([0, t] + [0] * (n - 2)))
        out = compose(logw, tz)
        expected = [0] + [(-1) ** (k + 1) * t ** k / k for k in range(1, n)]
        assert np.abs(out.coeffs - expected).max() <= 1e-14

    def test_nonzero_constant_rejected(self):
        with pytest.raises(InvalidInput):
            compose(taylor(0, 1), taylor(1, 1))


class TestDerivative:
    def test_taylor(self):
        t = 0.7
        out = derivative(taylor(0, 1, t))
        assert np.allclose(out.coeffs, [1, 2 * t])

    def test_laurent(self):
        # d/dz (z + c/z) = 1 - c/z^2
        c = 0.25
        out = derivative(ComplexSeries.laurent([1, 0, c]))
        assert out.kind is Kind.LAURENT_AT_INFINITY
        assert np.allclose(out.coeffs, [0, 1, 0, -c])

    def test_second_derivative(self):
        t = 0.11
        out = derivative(derivative(taylor(0, 1, t)))
        assert np.allclose(out.coeffs, [2 * t])

    def test_order_one_degenerate(self):
        out = derivative(taylor(5.0))
        assert out.order == 1 and out.coeffs[0] == 0


class TestLogRatio:
    def test_mercator(self):
        t = 0.4
        n = 7
        out = log_ratio(taylor(*([1, t] + [0] * (n - 2))))
        expected = [0] + [(-1) ** (k + 1) * t ** k / k for k in range(1, n)]
        assert np.abs(out.coeffs - expected).max() <= 1e-14

    def test_log_of_one(self):
        out = log_ratio(taylor(1, 0, 0))
        assert np.abs(out.coeffs).max() == 0

    def test_additivity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = np.concatenate([[1.0], 0.3 * rng.standard_normal(7)]).astype(complex)
            b = np.concatenate([[1.0], 0.3 * rng.standard_normal(7)]).astype(complex)
            sa, sb = taylor(*a), taylor(*b)
            lhs = log_ratio(multiply(sa, sb))
            rhs = log_ratio(sa).coeffs + log_ratio(sb).coeffs
            assert np.abs(lhs.coeffs - rhs).max() <= 1e-12

    def test_constant_term_not_one_rejected(self):
        with pytest.raises(InvalidInput):
            log_ratio(taylor(2, 1))


class TestSampling:
    def test_monomial(self):
        r = 0.5
        theta = 2 * np.pi * np.arange(16) / 16
        out = coeffs_from_samples((r * np.exp(1j * theta)) ** 2, r)
        assert out.order == 3
        assert abs(out.coeffs[2] - 1.0) <= 1e-14
        assert np.abs(out.coeffs[:2]).max() <= 1e-14

    def test_constant(self):
        out = coeffs_from_samples(np.full(16, 3.0, dtype=complex), 0.5)
        assert out.order == 1 and abs(out.coeffs[0] - 3.0) <= 1e-14

    def test_geometric(self):
        # 1/(1 - z/2) on |z| = 0.5: c_k = 2^-k (M = 32 keeps the alias term
        # below the tolerance; at M = 16 it sits at 2^-32)
        r = 0.5
        theta = 2 * np.pi * np.arange(32) / 32
        z = r * np.exp(1j * theta)
        out = coeffs_from_samples(1.0 / (1.0 - z / 2.0), r)
        k = np.arange(out.order)
        assert out.order >= 10
        assert np.abs(out.coeffs - 2.0 ** (-k.astype(float))).max() <= 1e-12

    def test_round_trip_polynomials(self):
        rng = np.random.default_rng(5)
        m = 64
        for _ in range(10):
            deg = int(rng.integers(1, m // 2))
            c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
            a = taylor(*c)
            samples = samples_from_coeffs(a, 0.8, m)
            back = coeffs_from_samples(samples, 0.8)
            n = max(a.order, back.order)
            pa = np.zeros(n, complex)
            pb = np.zeros(n, complex)
            pa[:a.order] = a.coeffs
            pb[:back.order] = back.coeffs
            assert np.abs(pa - pb).max() <= 1e-12 * max(1.0, np.abs(c).max())

    def test_power_of_two_required(self):
        with pytest.raises(InvalidInput):
            coeffs_from_samples(np.ones(15, dtype=complex), 1.0)

    def test_outside_analyticity_diagnosed(self):
        # sqrt(1 - z/0.3) sampled on |z| = 0.5: the branch point at 0.3 sits
        # inside the circle, so the slowly-decaying spectrum blows up under
        # the 2^k unscaling
        theta = 2 * np.pi * np.arange(256) / 256
        z = 0.5 * np.exp(1j * theta)
        with pytest.raises(NumericalFailure):
            coeffs_from_samples(np.sqrt(1.0 - z / 0.3), 0.5)

    def test_laurent_extraction(self):
        c = 0.3
        theta = 2 * np.pi * np.arange(64) / 64
        z = 1.5 * np.exp(1j * theta)
        out = coeffs_from_samples(z + c / z, 1.5, Kind.LAURENT_AT_INFINITY)
        assert abs(out.coeffs[0] - 1.0) <= 1e-13
        assert abs(out.coeffs[2] - c) <= 1e-13


class TestEvaluate:
    def test_taylor_point(self):
        a = taylor(1, 2, 3)
        assert abs(evaluate(a, 0.5) - (1 + 1 + 0.75)) <= 1e-15

    def test_laurent_point(self):
        g = ComplexSeries.laurent([1, 0, 0.3])
        assert abs(evaluate(g, 2.0) - 2.15) <= 1e-15

    def test_invariants_rejected(self):
        with pytest.raises(InvalidInput):
            ComplexSeries.taylor([np.nan])
        with pytest.raises(InvalidInput):
            ComplexSeries.taylor([])
