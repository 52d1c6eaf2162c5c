"""Nonlinearity registry: f, f', slope at zero, deviation g, KPP/ZFK tests.

Admissible reactions vanish at 0 and at their upper zero, and are positive
between. The deviation g(u) = f'(0)u - f(u) decides the classification: a
KPP term has g >= 0 everywhere, a ZFK term has g <= 0 on an initial segment
[0, theta0] with theta0 > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams

_UPPER_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Classification:
    kind: str                  # "KPP" | "ZFK" | "neither"
    theta0: float | None       # initial segment where f >= f'(0) u (ZFK)
    witness: float             # u where the defining inequality is tight/violated


class Reaction:
    """Scalar reaction term with analytic derivative.

    evaluator/derivative are vectorized maps on u. upper_zero is the first
    positive zero of f (None for subcritical kendall where it does not
    exist). lipschitz is max |f'| over [0, upper_zero], used for stability
    bounds and for the wave iteration damping.
    """

    def __init__(self, name, evaluator, derivative, slope_at_zero,
                 upper_zero, params):
        self.name = name
        self._f = evaluator
        self._df = derivative
        self.slope_at_zero = float(slope_at_zero)
        self.upper_zero = None if upper_zero is None else float(upper_zero)
        self.params = dict(params)
        if self.upper_zero is not None:
            u = np.linspace(0.0, self.upper_zero, 2001)
            self.lipschitz = float(np.max(np.abs(self._df(u))))
            fu0 = float(self._f(np.array([0.0]))[0])
            fu1 = float(self._f(np.array([self.upper_zero]))[0])
            scale = max(1.0, abs(self.slope_at_zero))
            if abs(fu0) > _UPPER_ZERO_TOL * scale or \
               abs(fu1) > 1e-10 * scale:
                raise BadParams(
                    f"{name}: f(0)={fu0:.2e}, f(upper_zero)={fu1:.2e}")
        else:
            u = np.linspace(0.0, 1.0, 2001)
            self.lipschitz = float(np.max(np.abs(self._df(u))))

    def __call__(self, u):
        return self._f(np.asarray(u, dtype=float))

    def derivative(self, u):
        return self._df(np.asarray(u, dtype=float))

    def __repr__(self):
        return f"Reaction({self.name!r}, params={self.params})"


def deviation(r: Reaction, u) -> np.ndarray | float:
    """g(u) = f'(0) u - f(u)."""
    u = np.asarray(u, dtype=float)
    out = r.slope_at_zero * u - r(u)
    return float(out) if out.ndim == 0 else out


def classify(r: Reaction, grid_size: int = 1000) -> Classification:
    """Sample the deviation on an interior grid and classify KPP/ZFK."""
    if grid_size < 100:
        raise BadParams("grid_size must be at least 100")
    if r.upper_zero is None:
        return Classification("neither", None, 0.0)
    uz = r.upper_zero
    u = np.linspace(0.0, uz, grid_size + 2)[1:-1]
    g = deviation(r, u)
    tol = 1e-12 * max(abs(r.slope_at_zero), 1e-300)
    if np.all(g >= -tol):
        # witness: where the KPP inequality is closest to tight
        return Classification("KPP", None, float(u[np.argmin(g)]))
    below = g <= tol
    if below[0]:
        if np.all(below):
            return Classification("ZFK", float(u[-1]), float(u[-1]))
        first_bad = int(np.argmin(below))  # first index where g > tol
        theta0 = float(u[first_bad - 1]) if first_bad > 0 else 0.0
        if first_bad > 0 and theta0 >= 2.0 * uz / grid_size:
            return Classification("ZFK", theta0, theta0)
    return Classification("neither", None, float(u[np.argmax(np.abs(g))]))


def _hermite_blend(u, x0, x1, y0, y1, d0, d1):
    """Cubic Hermite on [x0, x1] with endpoint values/slopes."""
    w = x1 - x0
    t = (u - x0) / w
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t * t * (3 - 2 * t)
    h11 = t * t * (t - 1)
    return h00 * y0 + h10 * w * d0 + h01 * y1 + h11 * w * d1


def _hermite_blend_deriv(u, x0, x1, y0, y1, d0, d1):
    w = x1 - x0
    t = (u - x0) / w
    dh00 = 6 * t * (t - 1) / w
    dh10 = (1 - 4 * t + 3 * t * t)
    dh01 = -6 * t * (t - 1) / w
    dh11 = (3 * t * t - 2 * t)
    return dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1


def _bisect(fn, lo, hi, tol=1e-14, max_iter=200):
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BadParams("bisection bracket does not change sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def builtin(name: str, **params) -> Reaction:
    """Construct a named reaction.

    logistic(scale)            scale * u (1 - u)
    kpp_cubic(scale)           scale * u (1 - u)^2
    hadeler_rothe(a, scale)    scale * u (1 + a u)(1 - u)
    zfk_piecewise_smoothed(eps, theta, theta1, smoothing)
                               eps*u below theta, theta1 - u above, blended
                               C^1 over [theta - smoothing, theta + smoothing]
    kendall(S0, beta, alpha)   S0 (1 - exp(-beta u)) - alpha u
    """
    if name == "logistic":
        s = float(params.pop("scale", 1.0))
        _check_no_extra(name, params)
        if s <= 0:
            raise BadParams("logistic scale must be positive")
        return Reaction(
            name, lambda u: s * u * (1.0 - u), lambda u: s * (1.0 - 2.0 * u),
            slope_at_zero=s, upper_zero=1.0, params={"scale": s})

    if name == "kpp_cubic":
        s = float(params.pop("scale", 1.0))
        _check_no_extra(name, params)
        if s <= 0:
            raise BadParams("kpp_cubic scale must be positive")
        return Reaction(
            name, lambda u: s * u * (1.0 - u) ** 2,
            lambda u: s * (1.0 - u) * (1.0 - 3.0 * u),
            slope_at_zero=s, upper_zero=1.0, params={"scale": s})

    if name == "hadeler_rothe":
        a = float(params.pop("a"))
        s = float(params.pop("scale", 1.0))
        _check_no_extra(name, params)
        if a < 0 or s <= 0:
            raise BadParams("hadeler_rothe needs a >= 0 and scale > 0")
        return Reaction(
            name,
            lambda u: s * u * (1.0 + a * u) * (1.0 - u),
            lambda u: s * (1.0 + 2.0 * a * u - 3.0 * a * u * u - 2.0 * u),
            slope_at_zero=s, upper_zero=1.0, params={"a": a, "scale": s})

    if name == "zfk_piecewise_smoothed":
        eps = float(params.pop("eps"))
        theta = float(params.pop("theta"))
        theta1 = float(params.pop("theta1"))
        sm = float(params.pop("smoothing", 0.02))
        _check_no_extra(name, params)
        if not (eps > 0 and 0 < theta < theta1 < 1):
            raise BadParams("need eps > 0 and 0 < theta < theta1 < 1")
        if not (0 < sm < min(theta, theta1 - theta) / 2):
            raise BadParams("smoothing band must fit inside (0, theta1)")
        x0, x1 = theta - sm, theta + sm
        y0, y1 = eps * x0, theta1 - x1
        d0, d1 = eps, -1.0

        def f(u):
            u = np.asarray(u, dtype=float)
            out = np.where(u <= x0, eps * u, theta1 - u)
            band = (u > x0) & (u < x1)
            if np.any(band):
                out = np.where(
                    band, _hermite_blend(u, x0, x1, y0, y1, d0, d1), out)
            return out

        def df(u):
            u = np.asarray(u, dtype=float)
            out = np.where(u <= x0, eps, -1.0)
            band = (u > x0) & (u < x1)
            if np.any(band):
                out = np.where(
                    band, _hermite_blend_deriv(u, x0, x1, y0, y1, d0, d1),
                    out)
            return out

        return Reaction(name, f, df, slope_at_zero=eps, upper_zero=theta1,
                        params={"eps": eps, "theta": theta, "theta1": theta1,
                                "smoothing": sm})

    if name == "kendall":
        s0 = float(params.pop("S0"))
        beta = float(params.pop("beta"))
        alpha = float(params.pop("alpha"))
        _check_no_extra(name, params)
        if min(s0, beta, alpha) <= 0:
            raise BadParams("kendall needs S0, beta, alpha > 0")
        r0 = s0 * beta / alpha

        def f(u):
            u = np.asarray(u, dtype=float)
            return s0 * (1.0 - np.exp(-beta * u)) - alpha * u

        def df(u):
            u = np.asarray(u, dtype=float)
            return s0 * beta * np.exp(-beta * u) - alpha

        upper = None
        if r0 > 1.0:
            # positive root of alpha u = S0 (1 - exp(-beta u)), cached once
            hi = 2.0 * s0 / alpha
            while f(np.array([hi]))[0] >= 0:
                hi *= 2.0
            upper = _bisect(lambda u: float(f(np.array([u]))[0]),
                            1e-12 * s0, hi)
        return Reaction(name, f, df, slope_at_zero=s0 * beta - alpha,
                        upper_zero=upper,
                        params={"S0": s0, "beta": beta, "alpha": alpha})

    raise BadParams(f"unknown reaction {name!r}")


def _check_no_extra(name, params):
    if params:
        raise BadParams(f"{name}: unexpected parameters {sorted(params)}")


def from_descriptor(d: dict) -> Reaction:
    """Reaction from its JSON descriptor {"name": ..., "params": {...}}."""
    return builtin(d["name"], **d.get("params", {}))
