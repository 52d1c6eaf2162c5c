"""Asymptotic-law estimates from level-set traces X_theta(t).

Three laws are fit: a plain spreading speed, the logarithmic-delay law
X = c t + mu ln t + b with c supplied externally (fixing c removes the
dominant collinearity between t and ln t on feasible horizons), and an
exponentially relaxing offset X = c t + b + O(e^{-omega t}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cauchy import FrontTrace
from .errors import TooFewSamples

_MIN_SAMPLES = 10


@dataclass
class FitResult:
    c_fit: float | None
    mu_fit: float | None
    b_fit: float | None
    omega_fit: float | None
    rms: float
    window: tuple

    def to_json(self) -> dict:
        return {"c": self.c_fit, "mu": self.mu_fit, "b": self.b_fit,
                "omega": self.omega_fit, "rms": self.rms,
                "window": list(self.window)}


def _window(trace: FrontTrace, t_min: float):
    t = np.asarray(trace.times, dtype=float)
    x = np.asarray(trace.positions, dtype=float)
    mask = (t >= t_min) & np.isfinite(x)
    if mask.sum() < _MIN_SAMPLES:
        raise TooFewSamples(
            f"{int(mask.sum())} finite samples with t >= {t_min}")
    return t[mask], x[mask]


def fit_speed(trace: FrontTrace, t_min: float) -> float:
    """Least-squares slope of X against t on [t_min, end]."""
    t, x = _window(trace, t_min)
    coef = np.polyfit(t, x, 1)
    return float(coef[0])


def fit_log_law(trace: FrontTrace, c_known: float, t_min: float) -> FitResult:
    """Fit X - c t against {ln t, 1}: the Bramson-delay coefficient mu."""
    t, x = _window(trace, t_min)
    if t[0] <= 0:
        keep = t > 0
        t, x = t[keep], x[keep]
    y = x - c_known * t
    a = np.column_stack((np.log(t), np.ones_like(t)))
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    return FitResult(c_fit=float(c_known), mu_fit=float(coef[0]),
                     b_fit=float(coef[1]), omega_fit=None,
                     rms=float(np.sqrt(np.mean(resid ** 2))),
                     window=(float(t[0]), float(t[-1])))


def fit_relaxation(trace: FrontTrace, c_known: float,
                   t_min: float) -> FitResult:
    """Offset and relaxation rate of X - c t -> b + O(e^{-omega t}).

    b is the mean over the last quarter of the window; omega the decay
    slope of ln|X - c t - b| where the residual is clearly above both the
    machine-noise floor and the late-time bias of b. omega is None when
    the residual sits below the noise floor throughout.
    """
    t, x = _window(trace, t_min)
    y = x - c_known * t
    last_quarter = t >= t[0] + 0.75 * (t[-1] - t[0])
    b = float(np.mean(y[last_quarter]))
    resid = y - b
    # floor: machine noise plus the scatter of the settled late quarter,
    # which bounds how well b itself is known
    noise = max(1e-15 * float(np.max(np.abs(x))), 1e-300)
    late_std = float(np.std(resid[last_quarter]))
    floor = max(10.0 * noise, 2.0 * late_std)
    mask = np.abs(resid) > floor
    omega = None
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if mask.sum() >= _MIN_SAMPLES:
        coef = np.polyfit(t[mask], np.log(np.abs(resid[mask])), 1)
        omega = float(-coef[0])
    return FitResult(c_fit=float(c_known), mu_fit=None, b_fit=b,
                     omega_fit=omega, rms=rms,
                     window=(float(t[0]), float(t[-1])))
