"""Dispersion relation of the linearized front problem.

Exponential profiles e^{-lambda(x - ct)} solve the linearization at 0 iff

    D_c(lambda) = 2 int_0^hw (cosh(lambda x) - 1) K(x) dx - c lambda + f'(0)

vanishes. D is strictly convex in lambda with D -> +inf at both ends of
(0, inf), so c(lambda) = (f'(0) + 2 int (cosh-1) K)/lambda is unimodal: its
minimum is the critical speed c_K, attained at the double root lambda_*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, NewtonDiverged, NoMinimum, SubcriticalSpeed
from .kernels import Kernel, tilted_diffusivity

# cosh overflows past ~709; root searches stay below this exponent.
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class DispersionReport:
    c_K: float
    lambda_star: float
    d_star: float
    D_second_at_star: float
    D_third_at_star: float

    def to_json(self) -> dict:
        return {"c_K": self.c_K, "lambda_star": self.lambda_star,
                "d_star": self.d_star, "D2": self.D_second_at_star,
                "D3": self.D_third_at_star}


@dataclass(frozen=True)
class RootPair:
    lambda_minus: float
    lambda_plus: float
    speed: float


def D(k: Kernel, fprime0: float, c: float, lam) -> float | complex:
    """D_c(lambda); accepts real or complex lambda."""
    x, w, kv = k.half_quadrature()
    integral = 2.0 * np.sum(w * (np.cosh(lam * x) - 1.0) * kv)
    return integral - c * lam + fprime0


def D_derivatives(k: Kernel, fprime0: float, c: float, lam):
    """(D', D'') in lambda; D'' > 0 for nondegenerate kernels."""
    x, w, kv = k.half_quadrature()
    d1 = 2.0 * np.sum(w * x * kv * np.sinh(lam * x)) - c
    d2 = 2.0 * np.sum(w * x * x * kv * np.cosh(lam * x))
    return d1, d2


def _third_derivative(k: Kernel, lam: float) -> float:
    x, w, kv = k.half_quadrature()
    return float(2.0 * np.sum(w * x ** 3 * kv * np.sinh(lam * x)))


def growth_integral(k: Kernel, lam):
    """N(lambda) = 2 int_0^hw (cosh(lambda x) - 1) K(x) dx (c-free part)."""
    x, w, kv = k.half_quadrature()
    return 2.0 * np.sum(w * (np.cosh(lam * x) - 1.0) * kv)


def speed_of_decay(k: Kernel, fprime0: float, lam: float) -> float:
    """c(lambda) = (f'(0) + N(lambda)) / lambda for lambda > 0."""
    if lam <= 0:
        raise BadParams("decay exponent must be positive")
    return (fprime0 + growth_integral(k, lam)) / lam


def critical(k: Kernel, fprime0: float) -> DispersionReport:
    """Minimize c(lambda) over lambda > 0: golden bracket, then Newton.

    Newton runs on phi(lambda) = N'(lambda) lambda - N(lambda) - f'(0)
    (the numerator of c'), whose root is lambda_*; c_K = c(lambda_*).
    """
    if fprime0 <= 0:
        raise NoMinimum("requires a positive slope at zero")
    if k.moment(2) <= 0:
        raise NoMinimum("kernel second moment vanishes")
    hw = k.halfwidth
    lam_cap = _MAX_EXPONENT / hw

    # bracket the minimum geometrically
    lo = min(1e-8 / hw, 1e-8)
    hi = min(2.0 / hw, lam_cap)
    while speed_of_decay(k, fprime0, hi * 1.5) < speed_of_decay(k, fprime0, hi):
        hi *= 1.5
        if hi * 1.5 > lam_cap:
            raise NoMinimum("no interior minimum below the overflow cap")
    hi *= 1.5

    # golden-section to a modest width, Newton finishes
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1 = speed_of_decay(k, fprime0, c1)
    f2 = speed_of_decay(k, fprime0, c2)
    for _ in range(200):
        if b - a < 1e-6 * max(1.0, b):
            break
        if f1 < f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = speed_of_decay(k, fprime0, c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = speed_of_decay(k, fprime0, c2)
    lam = 0.5 * (a + b)

    x, w, kv = k.half_quadrature()
    for _ in range(100):
        n1 = 2.0 * np.sum(w * x * kv * np.sinh(lam * x))
        n2 = 2.0 * np.sum(w * x * x * kv * np.cosh(lam * x))
        n0 = growth_integral(k, lam)
        phi = n1 * lam - n0 - fprime0
        dphi = n2 * lam
        step = phi / dphi
        lam -= step
        if abs(step) < 1e-15 * max(1.0, lam):
            break
    c_k = speed_of_decay(k, fprime0, lam)
    d1, d2 = D_derivatives(k, fprime0, c_k, lam)
    report = DispersionReport(
        c_K=float(c_k), lambda_star=float(lam),
        d_star=tilted_diffusivity(k, lam),
        D_second_at_star=float(d2),
        D_third_at_star=_third_derivative(k, lam))
    resid = abs(D(k, fprime0, c_k, lam))
    if resid > 1e-10 or abs(d1) > 1e-10:
        raise NoMinimum(
            f"critical point residuals too large: |D|={resid:.2e}, "
            f"|D'|={abs(d1):.2e}")
    return report


def _newton_real(k, fprime0, c, lo, hi):
    """Bisection-guarded Newton for D(c, .) = 0 inside [lo, hi]."""
    flo = D(k, fprime0, c, lo)
    fhi = D(k, fprime0, c, hi)
    if flo * fhi > 0:
        raise BadParams("root bracket does not change sign")
    # bisection to a narrow bracket
    a, b, fa = lo, hi, flo
    for _ in range(200):
        if b - a < 1e-6 * max(1.0, abs(b)):
            break
        mid = 0.5 * (a + b)
        fm = D(k, fprime0, c, mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
    lam = 0.5 * (a + b)
    for _ in range(100):
        f = D(k, fprime0, c, lam)
        d1, _ = D_derivatives(k, fprime0, c, lam)
        step = f / d1
        lam -= step
        if abs(step) < 1e-14 * max(1.0, abs(lam)):
            break
    return float(lam)


def real_roots(k: Kernel, fprime0: float, c: float,
               report: DispersionReport | None = None) -> RootPair:
    """The two positive roots lambda_-(c) < lambda_* < lambda_+(c), c > c_K."""
    rep = report if report is not None else critical(k, fprime0)
    if c <= rep.c_K:
        raise SubcriticalSpeed(f"c = {c} <= c_K = {rep.c_K}")
    lam_s = rep.lambda_star
    lam_cap = _MAX_EXPONENT / k.halfwidth
    lo = 1e-12
    minus = _newton_real(k, fprime0, c, lo, lam_s)
    hi = min(2.0 * lam_s, lam_cap)
    while D(k, fprime0, c, hi) < 0:
        if hi >= lam_cap:
            raise BadParams("upper root beyond the overflow cap")
        hi = min(hi * 2.0, lam_cap)
    plus = _newton_real(k, fprime0, c, lam_s, hi)
    return RootPair(lambda_minus=minus, lambda_plus=plus, speed=float(c))


def _newton_complex(k, fprime0, c, seed, shift=0.0, max_iter=100):
    lam = complex(seed)
    for _ in range(max_iter):
        f = D(k, fprime0, c, lam) + shift
        if abs(f) < 1e-12:
            return lam, True
        x, w, kv = k.half_quadrature()
        d1 = 2.0 * np.sum(w * x * kv * np.sinh(lam * x)) - c
        lam = lam - f / d1
    return lam, bool(abs(D(k, fprime0, c, lam) + shift) < 1e-8)


def complex_branch_subcritical(k: Kernel, fprime0: float, c: float,
                               report: DispersionReport | None = None,
                               allow_fallback: bool = True):
    """Complex root of D_c near lambda_* for c slightly below c_K.

    Returns (lambda_real, omega, fallback_used); omega ~
    sqrt(2 (c_K - c) / D'') at leading order.
    """
    rep = report if report is not None else critical(k, fprime0)
    if not 0 < c <= rep.c_K:
        raise BadParams("requires 0 < c <= c_K")
    # leading order from D''/2 (lam - lam_*)^2 = -(c_K - c) lam:
    # the lambda_* factor matters at finite c_K - c.
    omega_seed = np.sqrt(
        2.0 * (rep.c_K - c) * rep.lambda_star / rep.D_second_at_star)
    if c == rep.c_K:
        return rep.lambda_star, 0.0, False
    seed = rep.lambda_star + 1j * omega_seed
    lam, ok = _newton_complex(k, fprime0, c, seed)
    if ok:
        return float(lam.real), abs(float(lam.imag)), False
    if allow_fallback:
        return rep.lambda_star, float(omega_seed), True
    raise NewtonDiverged(
        f"residual {abs(D(k, fprime0, c, lam)):.2e} after Newton"
    )


def complex_branch_shifted(k: Kernel, fprime0: float, mu: float,
                           report: DispersionReport | None = None):
    """Conjugate roots of D_{c_K}(lambda) + mu = 0 for small mu > 0.

    Leading order: lambda_* + D''' mu / (3 D''^2) +- i sqrt(2 mu / D'').
    """
    if mu < 0:
        raise BadParams("mu must be nonnegative")
    rep = report if report is not None else critical(k, fprime0)
    if mu == 0:
        root = complex(rep.lambda_star, 0.0)
        return root, root
    d2, d3 = rep.D_second_at_star, rep.D_third_at_star
    re_shift = d3 * mu / (3.0 * d2 * d2)
    seed = rep.lambda_star + re_shift + 1j * np.sqrt(2.0 * mu / d2)
    lam, ok = _newton_complex(k, fprime0, rep.c_K, seed, shift=mu)
    if not ok:
        raise NewtonDiverged("shifted complex branch did not converge")
    lam = complex(lam.real, abs(lam.imag))
    return lam, np.conj(lam)


def omega0(k: Kernel, lam: float) -> float:
    """omega_0(lambda) = int K(y)(1 - cos(lambda y)) dy >= 0."""
    x, w, kv = k.half_quadrature()
    return float(2.0 * np.sum(w * kv * (1.0 - np.cos(lam * x))))
