import numpy as np
import pytest

from frontlab import dispersion
from frontlab.dispersion import (D, D_derivatives, complex_branch_shifted,
                                 complex_branch_subcritical, critical,
                                 omega0, real_roots, speed_of_decay)
from frontlab.errors import NoMinimum, SubcriticalSpeed


class TestD:
    def test_at_lambda_zero_equals_slope(self, indicator_kernel):
        for c in (0.0, 1.7, -2.0):
            assert D(indicator_kernel, 1.0, c, 0.0) == 1.0
        assert D(indicator_kernel, 0.37, 5.0, 0.0) == 0.37

    def test_indicator_closed_form(self, indicator_kernel):
        # 1 + int_0^1 (cosh x - 1) dx = sinh(1) at c = 0, f'(0) = 1
        assert D(indicator_kernel, 1.0, 0.0, 1.0) == pytest.approx(
            np.sinh(1.0), rel=1e-7)

    def test_linear_in_speed(self, cosine_kernel):
        lam = 1.3
        d1 = D(cosine_kernel, 1.0, 0.4, lam)
        d2 = D(cosine_kernel, 1.0, 1.9, lam)
        assert d1 - d2 == pytest.approx((1.9 - 0.4) * lam, rel=1e-12)

    def test_derivatives_match_finite_differences(self, cosine_kernel):
        lam, c = 1.7, 0.8
        d1, d2 = D_derivatives(cosine_kernel, 1.0, c, lam)
        eps = 1e-6
        fd1 = (D(cosine_kernel, 1.0, c, lam + eps)
               - D(cosine_kernel, 1.0, c, lam - eps)) / (2 * eps)
        assert d1 == pytest.approx(fd1, rel=1e-6)
        # second difference needs a larger step to beat roundoff
        eps = 1e-4
        fd2 = (D(cosine_kernel, 1.0, c, lam + eps) - 2 * D(
            cosine_kernel, 1.0, c, lam)
            + D(cosine_kernel, 1.0, c, lam - eps)) / eps ** 2
        assert d2 == pytest.approx(fd2, rel=1e-6)

    def test_second_derivative_at_zero_is_second_moment(self, cosine_kernel):
        _, d2 = D_derivatives(cosine_kernel, 1.0, 0.5, 0.0)
        assert d2 == pytest.approx(cosine_kernel.moment(2), rel=1e-10)

    def test_first_derivative_at_zero_is_minus_c(self, cosine_kernel):
        d1, _ = D_derivatives(cosine_kernel, 1.0, 0.73, 0.0)
        assert d1 == pytest.approx(-0.73, abs=1e-14)


class TestCritical:
    def test_residuals(self, indicator_report, indicator_kernel):
        rep = indicator_report
        assert abs(D(indicator_kernel, 1.0, rep.c_K,
                     rep.lambda_star)) <= 1e-10
        d1, d2 = D_derivatives(indicator_kernel, 1.0, rep.c_K,
                               rep.lambda_star)
        assert abs(d1) <= 1e-10
        assert d2 > 0

    def test_dense_scan_oracle(self, indicator_kernel, indicator_report):
        # brute-force scan of c(lambda) on 1e5 points over (0, 20]
        lams = np.linspace(20.0 / 100000, 20.0, 100000)
        cs = np.array([speed_of_decay(indicator_kernel, 1.0, la)
                       for la in lams])
        assert cs.min() == pytest.approx(indicator_report.c_K, abs=1e-6)

    def test_monotone_in_slope(self, cosine_kernel):
        c1 = critical(cosine_kernel, 1.0).c_K
        c2 = critical(cosine_kernel, 2.0).c_K
        assert c2 > c1

    def test_no_minimum_for_bad_slope(self, cosine_kernel):
        with pytest.raises(NoMinimum):
            critical(cosine_kernel, -1.0)

    def test_speed_curve_above_minimum(self, cosine_kernel, cosine_report):
        rep = cosine_report
        for la in (0.3, 1.0, 2.0, 4.0, 6.0):
            if abs(la - rep.lambda_star) > 1e-3:
                assert speed_of_decay(cosine_kernel, 1.0, la) > rep.c_K

    def test_narrow_kernel_laplacian_value(self):
        # scaled kernel + slope scaled by eps^2 approaches
        # sqrt(2 <x^2 K> f'(0))
        from frontlab import kernels
        eps = 0.05
        k = kernels.make_kernel("cosine_bump", 1.0, normalize=True,
                                epsilon=eps)
        rep = critical(k, eps ** 2)
        target = np.sqrt(2.0 * k.moment(2) * eps ** 2)
        assert rep.c_K == pytest.approx(target, rel=0.02)


class TestRealRoots:
    def test_roots_bracket_lambda_star(self, cosine_kernel, cosine_report):
        rep = cosine_report
        rr = real_roots(cosine_kernel, 1.0, 1.5 * rep.c_K, rep)
        assert 0 < rr.lambda_minus < rep.lambda_star < rr.lambda_plus
        assert abs(D(cosine_kernel, 1.0, rr.speed,
                     rr.lambda_minus)) <= 1e-10
        assert abs(D(cosine_kernel, 1.0, rr.speed, rr.lambda_plus)) <= 1e-10

    def test_scan_oracle(self, indicator_kernel, indicator_report):
        c = 1.5 * indicator_report.c_K
        lams = np.linspace(1e-4, 8.0, 200001)
        vals = np.array([D(indicator_kernel, 1.0, c, la) for la in lams])
        sign_changes = np.nonzero(vals[:-1] * vals[1:] <= 0)[0]
        assert len(sign_changes) == 2
        rr = real_roots(indicator_kernel, 1.0, c, indicator_report)
        assert rr.lambda_minus == pytest.approx(
            lams[sign_changes[0]], abs=2 * (lams[1] - lams[0]))
        assert rr.lambda_plus == pytest.approx(
            lams[sign_changes[1]], abs=2 * (lams[1] - lams[0]))

    def test_near_critical_degeneracy(self, cosine_kernel, cosine_report):
        rep = cosine_report
        rr = real_roots(cosine_kernel, 1.0, rep.c_K + 1e-9, rep)
        assert abs(rr.lambda_minus - rep.lambda_star) < 1e-3
        assert abs(rr.lambda_plus - rep.lambda_star) < 1e-3

    def test_subcritical_rejected(self, cosine_kernel, cosine_report):
        with pytest.raises(SubcriticalSpeed):
            real_roots(cosine_kernel, 1.0, 0.9 * cosine_report.c_K,
                       cosine_report)

    def test_root_monotonicity_in_speed(self, cosine_kernel, cosine_report):
        rep = cosine_report
        cs = rep.c_K * np.array([1.1, 1.3, 1.6, 2.0])
        minus = []
        plus = []
        for c in cs:
            rr = real_roots(cosine_kernel, 1.0, c, rep)
            minus.append(rr.lambda_minus)
            plus.append(rr.lambda_plus)
        assert np.all(np.diff(minus) < 0)
        assert np.all(np.diff(plus) > 0)


class TestComplexBranches:
    def test_at_critical_speed(self, cosine_kernel, cosine_report):
        rep = cosine_report
        lr, om, fb = complex_branch_subcritical(cosine_kernel, 1.0,
                                                rep.c_K, rep)
        assert lr == rep.lambda_star
        assert om == 0.0
        assert not fb

    def test_leading_order_omega(self, cosine_kernel, cosine_report):
        # expansion D''/2 (lam-lam_*)^2 = -(c_K - c) lam gives
        # omega ~ sqrt(2 (c_K-c) lam_* / D'')
        rep = cosine_report
        c = 0.99 * rep.c_K
        lr, om, fb = complex_branch_subcritical(cosine_kernel, 1.0, c, rep)
        pred = np.sqrt(2 * (rep.c_K - c) * rep.lambda_star
                       / rep.D_second_at_star)
        assert not fb
        assert om == pytest.approx(pred, rel=0.10)

    def test_residual_at_root(self, cosine_kernel, cosine_report):
        rep = cosine_report
        c = 0.97 * rep.c_K
        lr, om, _ = complex_branch_subcritical(cosine_kernel, 1.0, c, rep)
        assert abs(D(cosine_kernel, 1.0, c, complex(lr, om))) <= 1e-10

    def test_shifted_double_root_at_zero(self, cosine_kernel, cosine_report):
        lp, lm = complex_branch_shifted(cosine_kernel, 1.0, 0.0,
                                        cosine_report)
        assert lp == complex(cosine_report.lambda_star, 0.0)
        assert lp == lm

    def test_shifted_real_part_expansion(self, cosine_kernel, cosine_report):
        rep = cosine_report
        mu = 1e-4
        lp, lm = complex_branch_shifted(cosine_kernel, 1.0, mu, rep)
        pred = rep.D_third_at_star * mu / (3 * rep.D_second_at_star ** 2)
        assert lp.real - rep.lambda_star == pytest.approx(pred, rel=0.20)
        assert lm == np.conj(lp)

    def test_shifted_residual(self, cosine_kernel, cosine_report):
        mu = 1e-3
        lp, _ = complex_branch_shifted(cosine_kernel, 1.0, mu,
                                       cosine_report)
        assert abs(D(cosine_kernel, 1.0, cosine_report.c_K, lp)
                   + mu) <= 1e-10


class TestOmega0:
    def test_zero_at_zero(self, cosine_kernel):
        assert omega0(cosine_kernel, 0.0) == 0.0

    def test_small_lambda_expansion(self, indicator_kernel):
        lam = 1e-3
        pred = lam ** 2 * (1 / 3) / 2
        assert omega0(indicator_kernel, lam) == pytest.approx(pred,
                                                              rel=1e-6)

    def test_bounded_by_twice_mass(self, cosine_kernel):
        for lam in (0.5, 3.0, 17.0, 111.0):
            assert omega0(cosine_kernel, lam) <= 2 * cosine_kernel.mass


def test_scaling_covariance():
    # replacing K by scaled(K, eps) and f'(0) by eps^2 f'(0) multiplies
    # c_K by eps (1 + o(1)); tolerances tighten as eps shrinks
    from frontlab import kernels
    base = kernels.make_kernel("cosine_bump", 1.0, normalize=True)
    target = np.sqrt(2.0 * base.moment(2))
    for eps, tol in ((0.2, 0.05), (0.1, 0.02), (0.05, 0.01)):
        k = kernels.make_kernel("cosine_bump", 1.0, normalize=True,
                                epsilon=eps)
        rep = critical(k, eps ** 2)
        assert rep.c_K == pytest.approx(eps ** 2 * target, rel=tol)


def test_report_json(cosine_report):
    doc = cosine_report.to_json()
    assert set(doc) == {"c_K", "lambda_star", "d_star", "D2", "D3"}
