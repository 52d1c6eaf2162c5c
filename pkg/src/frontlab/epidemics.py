"""SI dynamics and the Kendall nonlocal-SIR cumulative equation.

The homogeneous SI system S' = -beta S I, I' = beta S I - alpha I reduces,
through the cumulative infections u = int_0^t I, to the scalar equation

    u' = S0 (1 - e^{-beta u}) - alpha u + I0.

Spatially, contamination acts through a kernel of mass beta and the
cumulative density solves u_t = S0 (1 - e^{-K*u}) - alpha u + I0(x), a
KPP-type nonlocal equation whose front speed is the least linear wave
speed of v_t + S0 (beta v - K*v) = alpha (R0 - 1) v.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import dispersion
from .cauchy import (EvolutionConfig, Field, FrontTrace, convolve_values,
                     rightmost_crossing)
from .errors import BadParams, Instability, NoConvergence, SubcriticalR0
from .kernels import Kernel, scale_amplitude


@dataclass(frozen=True)
class EpidemicParams:
    S0: float
    beta: float
    alpha: float
    I0: float | None = None      # scalar seed for the homogeneous model

    def __post_init__(self):
        if min(self.S0, self.beta, self.alpha) <= 0:
            raise BadParams("S0, beta, alpha must be positive")
        if self.I0 is not None and self.I0 < 0:
            raise BadParams("I0 must be nonnegative")


@dataclass
class KendallResult:
    snapshots: list              # [(t, Field)] of the cumulative density u
    traces: list                 # FrontTrace list at the requested levels
    u_star: float | None
    monotone: bool               # u nondecreasing in t along the run
    warnings: list = field(default_factory=list)


def susceptibles(p: EpidemicParams, k: Kernel, u: Field) -> np.ndarray:
    """S = S0 exp(-K*u), always in (0, S0]."""
    w = k.sample_weights(u.h)
    conv = convolve_values(u.values, w, u.clamp_left, u.clamp_right)
    return p.S0 * np.exp(-conv)


def r0(p: EpidemicParams) -> float:
    """Basic reproduction number S0 beta / alpha."""
    return p.S0 * p.beta / p.alpha


def _final_size_curve(p: EpidemicParams, i0: float):
    """f(u) + I0 with f(u) = S0(1 - e^{-beta u}) - alpha u."""
    def g(u):
        return p.S0 * (1.0 - np.exp(-p.beta * u)) - p.alpha * u + i0
    return g


def u_star(p: EpidemicParams, i0: float = 0.0) -> float:
    """Positive root of alpha u = S0 (1 - e^{-beta u}) + I0 to 1e-14.

    With I0 = 0 this requires R0 > 1 (SubcriticalR0 otherwise); positive
    I0 always yields a root.
    """
    if i0 == 0.0 and r0(p) <= 1.0:
        raise SubcriticalR0(f"R0 = {r0(p):.4f} <= 1")
    g = _final_size_curve(p, i0)
    lo = 1e-12 * p.S0
    if i0 > 0:
        lo = 0.0
    hi = 2.0 * p.S0 / p.alpha + (i0 / p.alpha if i0 else 0.0)
    while g(hi) >= 0:
        hi *= 2.0
        if hi > 1e12 * p.S0:
            raise NoConvergence("final-size bracket failed to close")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def si_ode(p: EpidemicParams, t_end: float, dt: float) -> dict:
    """Integrate the SI system and the scalar cumulative equation.

    Returns trajectories t, S, I, u (from the system, u' = I) and
    u_scalar (from the cumulative ODE); the two u's agree to the scheme
    accuracy.
    """
    if p.I0 is None:
        raise BadParams("si_ode needs a scalar I0")
    if dt <= 0 or dt > 0.5 / (p.S0 * p.beta + p.alpha):
        raise BadParams("dt outside the explicit stability range")
    n = int(np.ceil(t_end / dt))
    dt = t_end / n

    def sys_rhs(y):
        s, i, _ = y
        return np.array([-p.beta * s * i,
                         p.beta * s * i - p.alpha * i,
                         i])

    def cum_rhs(u):
        return p.S0 * (1.0 - np.exp(-p.beta * u)) - p.alpha * u + p.I0

    ts = np.linspace(0.0, t_end, n + 1)
    sys = np.empty((n + 1, 3))
    cum = np.empty(n + 1)
    sys[0] = (p.S0, p.I0, 0.0)
    cum[0] = 0.0
    y = sys[0].copy()
    u = 0.0
    for m in range(n):
        k1 = sys_rhs(y)
        k2 = sys_rhs(y + 0.5 * dt * k1)
        k3 = sys_rhs(y + 0.5 * dt * k2)
        k4 = sys_rhs(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        l1 = cum_rhs(u)
        l2 = cum_rhs(u + 0.5 * dt * l1)
        l3 = cum_rhs(u + 0.5 * dt * l2)
        l4 = cum_rhs(u + dt * l3)
        u = u + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)
        if not (np.all(np.isfinite(y)) and np.isfinite(u)):
            raise Instability(f"non-finite state at t = {ts[m + 1]:.3f}")
        sys[m + 1] = y
        cum[m + 1] = u
    return {"t": ts, "S": sys[:, 0], "I": sys[:, 1], "u": sys[:, 2],
            "u_scalar": cum}


def linearized_speed(p: EpidemicParams, k: Kernel) -> dispersion.DispersionReport:
    """Critical speed of v_t + S0 (beta v - K*v) = alpha (R0 - 1) v.

    The kernel (mass beta) is amplitude-scaled by S0 and the slope is
    alpha (R0 - 1) = S0 beta - alpha; requires R0 > 1.
    """
    if r0(p) <= 1.0:
        raise SubcriticalR0("front speed defined only for R0 > 1")
    return dispersion.critical(scale_amplitude(k, p.S0),
                               p.alpha * (r0(p) - 1.0))


def kendall_simulate(p: EpidemicParams, k: Kernel, initial: Field,
                     cfg: EvolutionConfig, thresholds=None) -> KendallResult:
    """Integrate u_t = S0(1 - e^{-K*u}) - alpha u + I0(x) by RK4.

    initial.values holds the seed I0(x) (compactly supported); u starts
    from 0 and is tracked at the given absolute levels (default u_*/2).
    Clamps are 0/0: the cumulative density grows out of the seed support.
    """
    if abs(k.mass - p.beta) > 1e-8 * p.beta:
        raise BadParams(
            f"kernel mass {k.mass:.6g} must equal beta = {p.beta}")
    i0 = initial.values
    if np.any(i0 < 0):
        raise BadParams("I0 must be nonnegative")
    initial.check_domain(k)
    lip = p.S0 * p.beta + p.alpha
    if cfg.dt > 0.4 / lip:
        raise BadParams(f"dt above stability bound {0.4 / lip:.4g}")
    us = None
    if r0(p) > 1.0:
        us = u_star(p)
    if thresholds is None:
        if us is None:
            raise SubcriticalR0(
                "thresholds default to u_*/2, undefined for R0 <= 1")
        thresholds = (us / 2.0,)

    w = k.sample_weights(initial.h)

    def rhs(u):
        conv = convolve_values(u, w, 0.0, 0.0, method="direct")
        return p.S0 * (1.0 - np.exp(-conv)) - p.alpha * u + i0

    n_steps = int(round(cfg.t_end / cfg.dt))
    rec_stride = max(1, int(round(cfg.record_every / cfg.dt)))
    snap_every = cfg.snapshot_every or cfg.record_every
    snap_stride = max(1, int(round(snap_every / cfg.dt)))
    dt = cfg.t_end / n_steps

    u = np.zeros(initial.n)
    monotone = True
    times, rows = [0.0], [[np.nan] * len(thresholds)]
    snapshots = [(0.0, replace(initial, values=u.copy()))]
    bound = us if us is not None else 0.0
    # dynamic bound u_*(max I0) from the shifted final-size equation
    cap = 1.05 * u_star(p, i0=float(np.max(i0))) if np.max(i0) > 0 \
        else 1.05 * max(bound, 1.0)
    for m in range(1, n_steps + 1):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u_new = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u_new)):
            raise Instability(f"non-finite value at t = {m * dt:.3f}")
        if np.max(u_new) > cap:
            raise Instability("cumulative density exceeded its bound")
        if np.min(u_new - u) < -1e-12 * max(1.0, bound):
            monotone = False
        u = u_new
        t = m * dt
        if m % rec_stride == 0 or m == n_steps:
            fld = replace(initial, values=u)
            times.append(t)
            rows.append([rightmost_crossing(fld, th) for th in thresholds])
        if m % snap_stride == 0 or m == n_steps:
            snapshots.append((t, replace(initial, values=u.copy())))
    rows = np.asarray(rows, dtype=float)
    traces = [FrontTrace(theta=float(th), times=np.asarray(times),
                         positions=rows[:, j])
              for j, th in enumerate(thresholds)]
    res = KendallResult(snapshots=snapshots, traces=traces, u_star=us,
                        monotone=monotone)
    res.S0_cache = p.S0
    return res


def kendall_steady(p: EpidemicParams, k: Kernel, initial: Field,
                   max_sweeps: int = 20000) -> Field:
    """Minimal steady state of alpha u = S0(1 - e^{-K*u}) + I0(x).

    Monotone fixed-point iteration from u = 0: iterates are pointwise
    nondecreasing and bounded by u_*(max I0), so they converge to the
    minimal solution; stops at residual < 1e-10.
    """
    i0 = initial.values
    if np.any(i0 < 0):
        raise BadParams("I0 must be nonnegative")
    if r0(p) <= 1.0 and not np.any(i0 > 0):
        raise BadParams("needs R0 > 1 or a nonzero seed")
    w = k.sample_weights(initial.h)
    u = np.zeros(initial.n)
    scale = max(1.0, p.S0 / p.alpha)
    for _ in range(max_sweeps):
        conv = convolve_values(u, w, 0.0, 0.0)
        u_new = (p.S0 * (1.0 - np.exp(-conv)) + i0) / p.alpha
        # equation residual of the previous iterate is alpha * step size
        resid = p.alpha * float(np.max(np.abs(u_new - u)))
        u = u_new
        if resid < 1e-10 * scale:
            return replace(initial, values=u)
    raise NoConvergence(
        f"steady iteration stalled at residual {resid:.2e}")
