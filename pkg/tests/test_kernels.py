import numpy as np
import pytest

from frontlab import kernels
from frontlab.errors import (AsymmetricTable, BadParams, NegativeSample,
                             UnderResolved)
from frontlab.kernels import TiltedKernel, tilted_diffusivity


def quad_oracle(fn, a, b, n=10000):
    """Trapezoid quadrature oracle, independent of the kernel machinery."""
    x = np.linspace(a, b, n + 1)
    y = fn(x)
    return float(np.trapezoid(y, x))


class TestMakeKernel:
    def test_indicator_normalized_density(self, indicator_kernel):
        # uniform density forced by normalization: K = 1/2 on [-1, 1]
        assert indicator_kernel(0.5) == pytest.approx(0.5, abs=1e-14)
        assert indicator_kernel.mass == pytest.approx(1.0, rel=1e-12)
        assert indicator_kernel(1.5) == 0.0

    def test_cosine_bump_center_value(self, cosine_kernel):
        # oracle: mass of the raw shape by 1e4-point trapezoid, K(0) = 1/mass
        shape = lambda x: 0.5 * (1.0 + np.cos(np.pi * x))
        mass = quad_oracle(shape, -1.0, 1.0)
        expected = shape(np.array([0.0]))[0] / mass
        assert expected == pytest.approx(1.0, rel=1e-9)
        assert cosine_kernel(0.0) == pytest.approx(expected, rel=1e-9)
        assert cosine_kernel.mass == pytest.approx(1.0, rel=1e-10)

    def test_polynomial_bump_mass(self):
        k = kernels.make_kernel("polynomial_bump", 1.0, normalize=True)
        assert k.mass == pytest.approx(1.0, rel=1e-10)
        # unnormalized mass of (1-x^2)^2 on [-1,1] is 16/15
        k2 = kernels.make_kernel("polynomial_bump", 1.0)
        assert k2.mass == pytest.approx(16.0 / 15.0, rel=1e-10)

    def test_negative_table_sample_rejected(self):
        with pytest.raises(NegativeSample):
            kernels.make_kernel("table", 1.0,
                                samples=[0.1, 0.5, 1.0, 0.5, -0.1])

    def test_asymmetric_table_rejected(self):
        with pytest.raises(AsymmetricTable):
            kernels.make_kernel("table", 1.0,
                                samples=[0.1, 0.5, 1.0, 0.6, 0.1])

    def test_table_kernel_interpolates(self):
        k = kernels.make_kernel("table", 1.0,
                                samples=[0.0, 0.5, 1.0, 0.5, 0.0],
                                normalize=True)
        assert k.mass == pytest.approx(1.0, rel=1e-10)
        assert k(0.25) == pytest.approx(k(-0.25), abs=1e-15)

    def test_bad_halfwidth(self):
        with pytest.raises(BadParams):
            kernels.make_kernel("indicator", -1.0)

    def test_scaled_support(self):
        k = kernels.make_kernel("cosine_bump", 1.0, normalize=True,
                                epsilon=0.1)
        assert k.halfwidth == pytest.approx(0.1)
        assert k.mass == pytest.approx(1.0, rel=1e-10)
        assert k(0.2) == 0.0


class TestMoments:
    def test_indicator_second_moment(self, indicator_kernel):
        # analytic: int z^2 / 2 dz over [-1,1] = 1/3
        assert indicator_kernel.moment(2) == pytest.approx(1 / 3, rel=1e-12)

    def test_odd_moments_vanish_exactly(self, cosine_kernel):
        assert cosine_kernel.moment(1) == 0.0
        assert cosine_kernel.moment(3) == 0.0

    def test_cosine_second_moment_oracle(self, cosine_kernel):
        # Richardson-extrapolated trapezoid oracle
        shape = lambda x: 0.5 * (1.0 + np.cos(np.pi * x)) * x * x
        fine = quad_oracle(shape, -1.0, 1.0, n=20000)
        coarse = quad_oracle(shape, -1.0, 1.0, n=10000)
        oracle = (4 * fine - coarse) / 3
        # closed form 1/3 - 2/pi^2
        assert oracle == pytest.approx(1 / 3 - 2 / np.pi ** 2, rel=1e-12)
        assert cosine_kernel.moment(2) == pytest.approx(oracle, rel=1e-10)

    def test_scaled_moment_change_of_variables(self, cosine_kernel):
        for eps in (0.2, 0.05):
            ks = kernels.make_kernel("cosine_bump", 1.0, normalize=True,
                                     epsilon=eps)
            assert ks.moment(2) == pytest.approx(
                eps ** 2 * cosine_kernel.moment(2), rel=1e-8)


class TestTiltedDiffusivity:
    def test_untilted_is_half_second_moment(self, indicator_kernel):
        assert tilted_diffusivity(indicator_kernel, 0.0) == pytest.approx(
            1 / 6, rel=1e-10)

    def test_indicator_tilt_one_closed_form(self, indicator_kernel):
        # (1/2) int z^2 e^{-z} / 2 dz over [-1,1] = (e - 5/e)/4,
        # cross-checked by brute-force quadrature
        closed = (np.e - 5.0 / np.e) / 4.0
        brute = 0.25 * quad_oracle(lambda z: z * z * np.exp(-z),
                                   -1.0, 1.0, n=200000)
        assert brute == pytest.approx(closed, rel=1e-9)
        assert tilted_diffusivity(indicator_kernel, 1.0) == pytest.approx(
            closed, rel=1e-7)

    def test_even_in_tilt(self, cosine_kernel):
        a = tilted_diffusivity(cosine_kernel, 1.7)
        b = tilted_diffusivity(cosine_kernel, -1.7)
        assert a == b

    def test_increasing_in_tilt_magnitude(self, cosine_kernel):
        lams = np.linspace(0.0, 3.0, 13)
        vals = [tilted_diffusivity(cosine_kernel, la) for la in lams]
        assert np.all(np.diff(vals) > 0)


class TestSampleWeights:
    def test_under_resolved(self, indicator_kernel):
        with pytest.raises(UnderResolved):
            indicator_kernel.sample_weights(0.5)

    def test_indicator_weight_count_and_sum(self, indicator_kernel):
        w = indicator_kernel.sample_weights(1.0 / 64)
        assert len(w) == 129
        assert abs(w.sum() - indicator_kernel.mass) <= 1e-10

    def test_weights_even(self, cosine_kernel):
        w = cosine_kernel.sample_weights(1.0 / 32)
        assert np.array_equal(w, w[::-1])

    @pytest.mark.parametrize("shape", ["indicator", "cosine_bump",
                                       "polynomial_bump"])
    @pytest.mark.parametrize("h", [1 / 8, 1 / 16, 1 / 64])
    def test_mass_match_all_shapes(self, shape, h):
        k = kernels.make_kernel(shape, 1.0, normalize=True)
        w = k.sample_weights(h)
        assert abs(w.sum() - k.mass) <= 1e-10


class TestTiltedKernel:
    def test_support_matches_base(self, cosine_kernel):
        tk = TiltedKernel(cosine_kernel, 1.3)
        assert tk.halfwidth == cosine_kernel.halfwidth
        assert tk(1.2) == 0.0

    def test_even_moment_tilt_sign_immaterial(self, cosine_kernel):
        # int z^2 K_* dz with K_* = e^{lam z} K equals the -lam version
        tp = TiltedKernel(cosine_kernel, 0.9)
        tm = TiltedKernel(cosine_kernel, -0.9)
        x = np.linspace(-1, 1, 20001)
        mp = np.trapezoid(x * x * tp(x), x)
        mm = np.trapezoid(x * x * tm(x), x)
        assert mp == pytest.approx(mm, rel=1e-10)


def test_descriptor_roundtrip():
    d = {"shape": "cosine_bump", "halfwidth": 1.0, "normalize": True,
         "epsilon": 0.1}
    k = kernels.from_descriptor(d)
    assert k.halfwidth == pytest.approx(0.1)
    assert k.mass == pytest.approx(1.0, rel=1e-10)
