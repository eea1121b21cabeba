import numpy as np
import pytest

from weldlab import maps as mp
from weldlab.errors import InvalidInput, NumericalFailure
from weldlab.series import ComplexSeries, Kind, evaluate


def boundary_points(series, m=1024):
    theta = 2 * np.pi * np.arange(m) / m
    return evaluate(series, np.exp(1j * theta))


class TestTheodorsen:
    def test_circle_gives_identity(self):
        res = mp.theodorsen_interior(mp.circle_domain(), 64)
        assert res.residual <= 1e-12
        assert np.abs(res.phi - 2 * np.pi * np.arange(64) / 64).max() <= 1e-12
        assert abs(res.series.coeffs[1] - 1.0) <= 1e-13
        assert np.abs(res.series.coeffs[2:]).max() if res.series.order > 2 else 0 <= 1e-13

    def test_ellipse_cross_validation(self, ellipse03):
        # interior boundary against the closed-form exterior curve through
        # the shared ellipse
        fb = boundary_points(ellipse03.interior)
        d = mp.distance_to_curve(fb, ellipse03.exterior)
        assert d.max() <= 1e-8

    def test_bump_image_matches_rho(self):
        dom = mp.bump_domain(0.1, 3)
        res = mp.theodorsen_interior(dom, 1024)
        w = boundary_points(res.series, 512)
        resid = np.abs(np.abs(w) - dom.rho(np.angle(w)))
        assert resid.max() <= 1e-8

    def test_smoothness_bound_value(self):
        # polar bound of the ellipse is 2c/(1-c^2)
        for c in (0.1, 0.3, 0.5):
            dom = mp.ellipse_domain(c)
            assert abs(dom.smoothness_bound - 2 * c / (1 - c * c)) <= 1e-5

    def test_nonconvergence_diagnostic(self):
        dom = mp.ellipse_domain(0.5)
        with pytest.raises(NumericalFailure):
            mp.theodorsen_interior(dom, 1024, tol=1e-13, max_iterations=3)

    def test_invalid_sample_count(self):
        with pytest.raises(InvalidInput):
            mp.theodorsen_interior(mp.circle_domain(), 100)

    def test_sampled_domain_matches_closed_form(self):
        dom0 = mp.bump_domain(0.1, 3)
        theta = 2 * np.pi * np.arange(64) / 64
        dom1 = mp.domain_from_samples(dom0.rho(theta))
        tt = np.linspace(0, 2 * np.pi, 777)
        assert np.abs(dom0.rho(tt) - dom1.rho(tt)).max() <= 1e-13
        res = mp.theodorsen_interior(dom1, 256)
        w = boundary_points(res.series, 256)
        assert np.abs(np.abs(w) - dom0.rho(np.angle(w))).max() <= 1e-8


class TestInversion:
    def test_identity_fixed_point(self):
        f = ComplexSeries.identity(Kind.TAYLOR_AT_ZERO, 8)
        g = mp.exterior_via_inversion(f, 256)
        assert abs(g.coeffs[0] - 1.0) <= 1e-12
        if g.order > 1:
            assert np.abs(g.coeffs[1:]).max() <= 1e-12

    def test_inverted_ellipse_matches_joukowski(self, ellipse03):
        # interior map of the reflected ellipse domain, pushed back out,
        # reproduces the closed-form exterior curve
        c = 0.3
        dom = mp.inverted_domain(mp.ellipse_domain(c))
        res = mp.theodorsen_interior(dom, 1024)
        g = mp.exterior_via_inversion(res.series, 1024)
        gb = boundary_points(g)
        target = ComplexSeries.laurent([1.0, 0.0, c, 0, 0, 0, 0, 0])
        assert mp.distance_to_curve(gb, target).max() <= 1e-8

    def test_involution(self, bump_pair):
        # applying the reflection recipe twice returns the original map
        m = 1024
        f2 = mp.interior_via_inversion(
            mp.exterior_via_inversion(bump_pair.interior, m), m)
        theta = np.exp(1j * 2 * np.pi * np.arange(64) / 64)
        for r in (0.3, 0.7, 0.95):
            orig = evaluate(bump_pair.interior, r * theta)
            back = evaluate(f2, r * theta)
            assert np.abs(orig - back).max() <= 1e-12


class TestNormalizePair:
    def test_identity(self, identity_pair):
        assert identity_pair.g_prime_at_infinity == 1.0
        assert identity_pair.interior.coeffs[0] == 0
        assert identity_pair.interior.coeffs[1] == 1

    def test_affine_arithmetic(self):
        # raw f with f(0) = 1, f'(0) = 2 is shifted and scaled back
        raw_f = ComplexSeries.taylor([1.0, 2.0, 0.0, 0.0])
        raw_g = ComplexSeries.laurent([2.0, 1.0, 0.0, 0.0])
        pair = mp.normalize_pair(raw_f, raw_g, check=False)
        assert pair.interior.coeffs[0] == 0
        assert pair.interior.coeffs[1] == 1
        assert abs(pair.g_prime_at_infinity - 1.0) <= 1e-15
        # constant term of g absorbed the shift: (1 - 1)/2 = 0
        assert abs(pair.exterior.coeffs[1]) <= 1e-15

    def test_degenerate_rejected(self):
        with pytest.raises(InvalidInput):
            mp.normalize_pair(ComplexSeries.taylor([0.0, 0.0, 1.0]),
                              ComplexSeries.laurent([1.0, 0.0]), check=False)

    def test_ellipse_g_prime(self, ellipse03):
        # |g'(inf)| = 1/f_raw'(0) feeds the log term of the action
        assert abs(ellipse03.g_prime_at_infinity) > 1.0


class TestCatalogInvariants:
    @pytest.mark.parametrize("fixture", ["identity_pair", "ellipse01",
                                         "ellipse03", "ellipse05", "bump_pair"])
    def test_boundary_agreement(self, fixture, request):
        pair = request.getfixturevalue(fixture)
        assert mp.pair_boundary_residual(pair.interior, pair.exterior,
                                         1024) <= 1e-7

    @pytest.mark.parametrize("fixture", ["ellipse01", "ellipse03",
                                         "ellipse05", "bump_pair"])
    def test_univalence_sampling(self, fixture, request):
        pair = request.getfixturevalue(fixture)
        pts = []
        for r in (0.5, 0.9, 0.99):
            theta = 2 * np.pi * np.arange(512) / 512
            pts.append(evaluate(pair.interior, r * np.exp(1j * theta)))
        vals = np.concatenate(pts)
        d = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(d, np.inf)
        assert d.min() > 0
        pts = []
        for r in (1.01, 1.1, 2.0):
            theta = 2 * np.pi * np.arange(512) / 512
            pts.append(evaluate(pair.exterior, r * np.exp(1j * theta)))
        vals = np.concatenate(pts)
        d = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(d, np.inf)
        assert d.min() > 0

    def test_parameter_validation(self):
        with pytest.raises(InvalidInput):
            mp.catalog("ellipse", c=1.5)
        with pytest.raises(InvalidInput):
            mp.catalog("fourier_bump", eps=0.9, k=2)  # bound >= 1
        with pytest.raises(InvalidInput):
            mp.catalog("nosuch")


class TestSchwarzian:
    def test_identity_map(self):
        s = mp.schwarzian(ComplexSeries.identity(Kind.TAYLOR_AT_ZERO, 8), 0.3 + 0.1j)
        assert abs(s) <= 1e-14

    def test_moebius_series(self):
        # z/(1 - 0.4 z) as a series: Schwarzian vanishes identically
        beta = 0.4
        coeffs = [0.0] + [beta ** (k - 1) for k in range(1, 24)]
        m = ComplexSeries.taylor(coeffs)
        pts = np.array([0.0, 0.2 - 0.3j, 0.5j, -0.4])
        assert np.abs(mp.schwarzian(m, pts)).max() <= 1e-9

    def test_quadratic_value(self):
        # S(z + t z^2)(0) = -6 t^2
        for t in (0.1, 0.2):
            s = mp.schwarzian(ComplexSeries.taylor([0, 1, t]), 0.0)
            assert abs(s - (-6 * t * t)) <= 1e-10

    def test_evaluator_route_matches_series(self, ellipse03):
        f = ellipse03.interior
        pts = 0.5 * np.exp(1j * 2 * np.pi * np.arange(7) / 7)
        via_series = mp.schwarzian(f, pts)
        via_eval = mp.schwarzian(lambda z: evaluate(f, z), pts)
        assert np.abs(via_series - via_eval).max() <= 1e-9

    def test_cocycle(self, ellipse03):
        # S(h o m) = (S(h) o m) m'^2 for a disk Moebius transform
        rng = np.random.default_rng(17)
        a = 1.2
        b = 0.3 + 0.2j
        norm = np.sqrt(a * a - abs(b) ** 2)
        m = mp.MoebiusTransform(np.array([[a, b], [np.conj(b), a]]) / norm)
        f = ellipse03.interior
        pts = 0.6 * np.sqrt(rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
        lhs = mp.schwarzian(lambda z: evaluate(f, m(z)), pts)
        rhs = mp.schwarzian(f, m(pts)) * m.derivative(pts) ** 2
        assert np.abs(lhs - rhs).max() <= 1e-9

    def test_critical_point_rejected(self):
        # h = z^2 has h'(0) = 0
        with pytest.raises(NumericalFailure):
            mp.schwarzian(ComplexSeries.taylor([0, 0, 1.0]), 0.0)


class TestTheta:
    def test_identity_pair(self, identity_pair):
        with pytest.raises(InvalidInput):
            # every point is near the unit-circle curve or outside the tube
            # only for points ON the curve; interior points are fine:
            mp.theta(identity_pair, 1.0)
        assert abs(mp.theta(identity_pair, 0.2 + 0.1j)) <= 1e-12
        assert abs(mp.theta(identity_pair, 2.0 - 1.0j)) <= 1e-12

    def test_moebius_interior_map(self):
        # pair with f replaced by a Moebius map: theta = 0 on the interior
        beta = 0.2
        coeffs = [0.0] + [beta ** (k - 1) for k in range(1, 28)]
        pair = mp.WeldingPair(
            interior=ComplexSeries.taylor(coeffs),
            exterior=ComplexSeries.identity(Kind.LAURENT_AT_INFINITY, 4),
            g_prime_at_infinity=1.0, family_tag="moebius-test")
        assert abs(mp.theta(pair, 0.1 - 0.2j)) <= 1e-9

    def test_chain_rule_oracle(self, ellipse03):
        # w = 0 = f(0): theta(0) = -S(f)(0)/f'(0)^2 with f'(0) = 1
        val = mp.theta(ellipse03, 0.0)
        oracle = -mp.schwarzian(ellipse03.interior, 0.0)
        assert abs(val - oracle) <= 1e-8

    def test_tube_rejection(self, ellipse03):
        boundary_point = complex(evaluate(ellipse03.interior, 1.0 + 0j))
        with pytest.raises(InvalidInput):
            mp.theta(ellipse03, boundary_point)


class TestPairSerialization:
    def test_round_trip_bit_exact(self, ellipse03):
        text = mp.pair_to_json(ellipse03)
        back = mp.pair_from_json(text)
        assert np.array_equal(back.interior.coeffs, ellipse03.interior.coeffs)
        assert np.array_equal(back.exterior.coeffs, ellipse03.exterior.coeffs)
        assert back.g_prime_at_infinity == ellipse03.g_prime_at_infinity
        assert back.family_tag == ellipse03.family_tag
