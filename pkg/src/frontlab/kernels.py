"""Diffusion kernels: construction, quadrature, moments, tilting.

A kernel K is even, nonnegative and supported in [-halfwidth, halfwidth].
All integrals are composite trapezoid sums on a symmetric node set that
includes 0 and both endpoints, so evenness is preserved exactly and the
discrete diffusion annihilates constants.
"""

from __future__ import annotations

import numpy as np

from .errors import AsymmetricTable, BadParams, NegativeSample, UnderResolved

# Nodes per half-support for the dense reference quadrature.
_QUAD_HALF_POINTS = 4096

# Resolution floor: below 8 points per halfwidth, dispersion quantities
# drift by more than 1%.
MIN_POINTS_PER_HALFWIDTH = 8


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


class Kernel:
    """Even, nonnegative density with compact support [-halfwidth, halfwidth].

    The evaluator is pure and vectorized; mass and moments 0..4 are cached
    at construction from the dense trapezoid rule.
    """

    def __init__(self, evaluator, halfwidth: float, shape: str = "custom",
                 descriptor: dict | None = None):
        if halfwidth <= 0:
            raise BadParams(f"halfwidth must be positive, got {halfwidth}")
        self.halfwidth = float(halfwidth)
        self.shape = shape
        self.descriptor = dict(descriptor or {})
        self._eval = evaluator

        # dense symmetric quadrature grid (odd node count, includes 0, +-hw)
        n = _QUAD_HALF_POINTS
        self._half_nodes = np.linspace(0.0, self.halfwidth, n + 1)
        self._half_weights = _trapezoid_weights(n + 1, self.halfwidth / n)
        self._half_values = np.asarray(self(self._half_nodes), dtype=float)

        # 2 x the half-rule reproduces the full symmetric trapezoid exactly:
        # the 0 node carries h/2 in the half rule, h after mirroring.
        self.cached_mass = float(2.0 * np.sum(
            self._half_weights * self._half_values))
        self.cached_moments = [self.moment(n_) for n_ in range(5)]
        self._weights_cache: dict[float, np.ndarray] = {}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= self.halfwidth, self._eval(x), 0.0)
        return out

    @property
    def mass(self) -> float:
        return self.cached_mass

    def half_quadrature(self):
        """Nodes, weights and kernel values of the [0, halfwidth] rule."""
        return self._half_nodes, self._half_weights, self._half_values

    def moment(self, n: int) -> float:
        """n-th moment of K; odd moments vanish exactly by symmetry.

        Even moments are Richardson-extrapolated from nested trapezoid
        rules so the h^2 error cancels.
        """
        if n < 0:
            raise BadParams("moment order must be nonnegative")
        if n % 2 == 1:
            return 0.0
        x, w, kv = self._half_nodes, self._half_weights, self._half_values
        g = x ** n * kv
        t_fine = 2.0 * np.sum(w * g)
        w2 = _trapezoid_weights((len(x) - 1) // 2 + 1,
                                2 * (x[1] - x[0]))
        t_coarse = 2.0 * np.sum(w2 * g[::2])
        return float((4.0 * t_fine - t_coarse) / 3.0)

    def sample_weights(self, h: float) -> np.ndarray:
        """Discrete weights w_j ~ h*K(jh), j = -M..M, rescaled to the mass.

        Endpoint nodes landing exactly on +-halfwidth get the trapezoid 1/2
        factor before the rescale. Raises UnderResolved when fewer than
        MIN_POINTS_PER_HALFWIDTH points cover the half-support.
        """
        if h <= 0:
            raise BadParams("grid spacing must be positive")
        ratio = self.halfwidth / h
        if ratio < MIN_POINTS_PER_HALFWIDTH - 1e-12:
            raise UnderResolved(
                f"halfwidth/h = {ratio:.3f} < {MIN_POINTS_PER_HALFWIDTH}")
        key = round(h, 15)
        if key in self._weights_cache:
            return self._weights_cache[key]
        m = int(np.ceil(ratio - 1e-9))
        j = np.arange(-m, m + 1)
        w = h * self(j * h)
        if abs(m * h - self.halfwidth) <= 1e-12 * max(1.0, self.halfwidth):
            w[0] *= 0.5
            w[-1] *= 0.5
        total = w.sum()
        if total <= 0:
            raise BadParams("kernel mass vanished on the sample grid")
        w *= self.mass / total
        w = 0.5 * (w + w[::-1])  # enforce exact evenness of the vector
        self._weights_cache[key] = w
        return w

    def __repr__(self):
        return (f"Kernel(shape={self.shape!r}, halfwidth={self.halfwidth}, "
                f"mass={self.cached_mass:.6g})")


class TiltedKernel:
    """K_*(x) = exp(tilt * x) K(x); same support as the base kernel."""

    def __init__(self, base: Kernel, tilt_exponent: float):
        self.base = base
        self.tilt_exponent = float(tilt_exponent)
        self.halfwidth = base.halfwidth

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(self.tilt_exponent * x) * self.base(x)

    @property
    def mass(self) -> float:
        x, w, kv = self.base.half_quadrature()
        lam = self.tilt_exponent
        # int e^{lam z} K = 2 int_0 cosh(lam z) K by evenness of K
        return float(2.0 * np.sum(w * np.cosh(lam * x) * kv))

    def first_moment(self) -> float:
        x, w, kv = self.base.half_quadrature()
        lam = self.tilt_exponent
        return float(2.0 * np.sum(w * x * np.sinh(lam * x) * kv))

    def sample_weights(self, h: float) -> np.ndarray:
        """h*K_*(jh) weights rescaled to the tilted mass (not even)."""
        base_w = self.base.sample_weights(h)  # resolution check + layout
        m = (len(base_w) - 1) // 2
        j = np.arange(-m, m + 1)
        w = h * self(j * h)
        if abs(m * h - self.halfwidth) <= 1e-12 * max(1.0, self.halfwidth):
            w[0] *= 0.5
            w[-1] *= 0.5
        total = w.sum()
        if total <= 0:
            raise BadParams("tilted kernel mass vanished on the sample grid")
        w *= self.mass / total
        return w


def tilted_diffusivity(k: Kernel, lambda_star: float) -> float:
    """d_* = (1/2) int z^2 exp(-lambda_* z) K(z) dz (> 0).

    Evenness of K makes the sign of the tilt immaterial; the symmetrized
    form int_0^hw z^2 cosh(lambda z) K(z) dz is used so d(lam) == d(-lam)
    exactly. Richardson extrapolation removes the h^2 quadrature error.
    """
    x, w, kv = k.half_quadrature()
    g = x * x * np.cosh(lambda_star * x) * kv
    t_fine = np.sum(w * g)
    w2 = _trapezoid_weights((len(x) - 1) // 2 + 1, 2 * (x[1] - x[0]))
    t_coarse = np.sum(w2 * g[::2])
    return float((4.0 * t_fine - t_coarse) / 3.0)


def moment(k: Kernel, n: int) -> float:
    """Moment int z^n K(z) dz by the kernel's cached quadrature."""
    return k.moment(n)


def sample_weights(k: Kernel, h: float) -> np.ndarray:
    return k.sample_weights(h)


def _indicator(halfwidth):
    return lambda x: np.ones_like(np.asarray(x, dtype=float))


def _cosine_bump(halfwidth):
    return lambda x: 0.5 * (1.0 + np.cos(np.pi * x / halfwidth))


def _polynomial_bump(halfwidth):
    return lambda x: (1.0 - (x / halfwidth) ** 2) ** 2


_SHAPES = {
    "indicator": _indicator,
    "cosine_bump": _cosine_bump,
    "polynomial_bump": _polynomial_bump,
}


def make_kernel(shape: str, halfwidth: float = 1.0, normalize: bool = False,
                epsilon: float | None = None,
                samples=None) -> Kernel:
    """Build a kernel of the given family.

    shape: "indicator" | "cosine_bump" | "polynomial_bump" | "table".
    epsilon, when given, rescales the kernel as an approximation of the
    identity: K_eps(x) = K(x/eps)/eps with support eps*halfwidth.
    Table kernels take an odd number of nonnegative, even samples on a
    uniform grid over [-halfwidth, halfwidth] and interpolate linearly.
    """
    if halfwidth <= 0:
        raise BadParams(f"halfwidth must be positive, got {halfwidth}")
    descriptor = {"shape": shape, "halfwidth": halfwidth,
                  "normalize": bool(normalize)}
    if shape == "table":
        if samples is None:
            raise BadParams("table kernel requires samples")
        s = np.asarray(samples, dtype=float)
        if s.ndim != 1 or len(s) < 3 or len(s) % 2 == 0:
            raise BadParams("table needs an odd number (>=3) of samples")
        if np.any(s < 0):
            raise NegativeSample("table contains a negative sample")
        if np.max(np.abs(s - s[::-1])) > 1e-12 * max(1.0, np.max(np.abs(s))):
            raise AsymmetricTable("table samples are not even in x")
        xs = np.linspace(-halfwidth, halfwidth, len(s))

        def evaluator(x, xs=xs, s=s):
            return np.interp(np.asarray(x, dtype=float), xs, s,
                             left=0.0, right=0.0)
        descriptor["samples"] = [float(v) for v in s]
    elif shape in _SHAPES:
        evaluator = _SHAPES[shape](halfwidth)
    else:
        raise BadParams(f"unknown kernel shape {shape!r}")

    hw = halfwidth
    if epsilon is not None:
        if epsilon <= 0:
            raise BadParams("epsilon must be positive")
        inner = evaluator

        def evaluator(x, inner=inner, eps=epsilon):
            return inner(np.asarray(x, dtype=float) / eps) / eps
        hw = epsilon * halfwidth
        descriptor["epsilon"] = epsilon

    k = Kernel(evaluator, hw, shape=shape, descriptor=descriptor)
    if normalize:
        k = scale_amplitude(k, 1.0 / k.mass)
        k.descriptor = descriptor
    return k


def scale_amplitude(k: Kernel, factor: float) -> Kernel:
    """Kernel with density factor*K(x); mass and moments scale by factor."""
    if factor <= 0:
        raise BadParams("amplitude factor must be positive")
    inner = k

    def evaluator(x, inner=inner, f=factor):
        return f * inner(x)
    d = dict(k.descriptor)
    d["amplitude"] = factor * d.get("amplitude", 1.0)
    return Kernel(evaluator, k.halfwidth, shape=k.shape, descriptor=d)


def from_descriptor(d: dict) -> Kernel:
    """Kernel from its JSON descriptor {shape, halfwidth, epsilon?, ...}."""
    return make_kernel(
        shape=d["shape"],
        halfwidth=float(d.get("halfwidth", 1.0)),
        normalize=bool(d.get("normalize", False)),
        epsilon=d.get("epsilon"),
        samples=d.get("samples"),
    )
