import numpy as np
import pytest

from frontlab import reactions
from frontlab.errors import BadParams
from frontlab.reactions import builtin, classify, deviation


def bisect_oracle(fn, lo, hi, iters=100):
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * fn(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = fn(lo)
    return 0.5 * (lo + hi)


class TestBuiltins:
    def test_logistic_values(self, logistic):
        assert logistic(0.5) == pytest.approx(0.25)
        assert logistic.slope_at_zero == 1.0
        assert logistic.upper_zero == 1.0

    def test_logistic_scale(self):
        r = builtin("logistic", scale=0.25)
        assert r.slope_at_zero == pytest.approx(0.25)
        assert r(0.5) == pytest.approx(0.0625)

    def test_hadeler_rothe_a0_is_logistic(self, logistic):
        r = builtin("hadeler_rothe", a=0.0)
        u = np.linspace(0, 1, 100)
        assert np.max(np.abs(r(u) - logistic(u))) < 1e-15

    def test_kendall_upper_zero_oracle(self):
        r = builtin("kendall", S0=2.0, beta=1.0, alpha=1.0)
        # bisection oracle on [1e-6, 10] for u = 2(1 - e^{-u})
        root = bisect_oracle(lambda u: 2 * (1 - np.exp(-u)) - u, 1e-6, 10.0)
        assert root == pytest.approx(1.5936242600400377, rel=1e-12)
        assert r.upper_zero == pytest.approx(root, rel=1e-12)

    def test_kendall_subcritical_has_no_upper_zero(self):
        r = builtin("kendall", S0=0.5, beta=1.0, alpha=1.0)
        assert r.upper_zero is None
        assert classify(r).kind == "neither"

    def test_bad_params(self):
        with pytest.raises(BadParams):
            builtin("zfk_piecewise_smoothed", eps=-0.1, theta=0.3,
                    theta1=0.8)
        with pytest.raises(BadParams):
            builtin("zfk_piecewise_smoothed", eps=0.1, theta=0.9,
                    theta1=0.8)
        with pytest.raises(BadParams):
            builtin("logistic", scale=1.0, bogus=2.0)
        with pytest.raises(BadParams):
            builtin("unknown_name")

    def test_zfk_upper_zero_is_theta1(self, zfk_reaction):
        assert zfk_reaction.upper_zero == pytest.approx(0.8)
        assert float(zfk_reaction(np.array([0.8]))[0]) == pytest.approx(
            0.0, abs=1e-14)


class TestDeviation:
    def test_logistic_deviation_is_u_squared(self, logistic):
        assert deviation(logistic, 0.3) == pytest.approx(0.09, abs=1e-15)

    def test_zero_at_origin(self, zfk_reaction, logistic):
        for r in (zfk_reaction, logistic):
            assert deviation(r, 0.0) == 0.0

    def test_zfk_deviation_vanishes_below_theta(self, zfk_reaction):
        # f = eps*u below the smoothing band, so the deviation is 0 there
        assert deviation(zfk_reaction, 0.2) == pytest.approx(0.0, abs=1e-15)


class TestClassify:
    def test_logistic_is_kpp(self, logistic):
        assert classify(logistic).kind == "KPP"

    def test_kpp_cubic_is_kpp(self):
        assert classify(builtin("kpp_cubic")).kind == "KPP"

    def test_hadeler_rothe_a3_is_zfk(self):
        # sign oracle: f - f'(0)u = u^2((a-1) - a u) > 0 iff u < (a-1)/a
        cls = classify(builtin("hadeler_rothe", a=3.0))
        assert cls.kind == "ZFK"
        assert cls.theta0 == pytest.approx(2.0 / 3.0, abs=2e-3)

    def test_hadeler_rothe_a0_is_kpp(self):
        assert classify(builtin("hadeler_rothe", a=0.0)).kind == "KPP"

    def test_zfk_piecewise_theta0(self, zfk_reaction):
        # eps*u meets theta1 - u at u = theta1/(1+eps)
        cls = classify(zfk_reaction)
        assert cls.kind == "ZFK"
        assert cls.theta0 == pytest.approx(0.8 / 1.1, abs=2e-3)

    def test_grid_size_floor(self, logistic):
        with pytest.raises(BadParams):
            classify(logistic, grid_size=50)

    def test_scaled_classification_identical(self):
        for name in ("logistic", "kpp_cubic"):
            a = classify(builtin(name))
            b = classify(builtin(name, scale=1e-4))
            assert a.kind == b.kind


class TestDerivativeConsistency:
    @pytest.mark.parametrize("spec", [
        ("logistic", {}),
        ("kpp_cubic", {}),
        ("hadeler_rothe", {"a": 3.0}),
        ("zfk_piecewise_smoothed",
         {"eps": 0.1, "theta": 0.3, "theta1": 0.8, "smoothing": 0.05}),
        ("kendall", {"S0": 2.0, "beta": 1.0, "alpha": 1.0}),
    ])
    def test_derivative_matches_finite_differences(self, spec):
        name, params = spec
        r = builtin(name, **params)
        scale = r.upper_zero if r.upper_zero is not None else 1.0
        u = np.linspace(0.01, 0.99, 1000) * scale
        step = 1e-6 * scale
        fd = (r(u + step) - r(u - step)) / (2 * step)
        an = r.derivative(u)
        denom = np.maximum(np.abs(an), 1e-3 * np.max(np.abs(an)))
        assert np.max(np.abs(fd - an) / denom) < 1e-6

    def test_kpp_deviation_nonnegative_on_grid(self, logistic):
        u = np.linspace(0, 1, 500)
        assert np.min(deviation(logistic, u)) >= -1e-12

    def test_zfk_deviation_nonpositive_below_theta0(self, zfk_reaction):
        cls = classify(zfk_reaction)
        u = np.linspace(0, cls.theta0, 300)
        assert np.max(deviation(zfk_reaction, u)) <= 1e-12


def test_descriptor_roundtrip():
    r = reactions.from_descriptor(
        {"name": "hadeler_rothe", "params": {"a": 2.0, "scale": 0.5}})
    assert r.params == {"a": 2.0, "scale": 0.5}
