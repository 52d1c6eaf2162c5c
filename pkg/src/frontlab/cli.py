"""Config-driven command line driver.

Usage:
    frontlab <speed|simulate|wave|epidemic|heatkernel|fit>
             --config <path> [--out <dir>] [--seed <n>]

JSON in, CSV + JSON out, no interactive mode: the consumers are scripts
and plotting tools. Exit codes: 0 success, 2 config error, 3 numerical
failure, 4 I/O error. Output files are written atomically (temp+rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import dispersion, epidemics, frontfit, heatkernel, kernels
from . import reactions, waves
from .cauchy import (EvolutionConfig, Field, read_trace_csv, simulate,
                     write_snapshot_csv, write_trace_csv)
from .errors import FrontlabError
from .kernels import TiltedKernel


class ConfigError(Exception):
    pass


def _check_keys(doc: dict, allowed: set, required: set, where: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-frontlab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, doc: dict):
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _kernel_from(doc: dict) -> kernels.Kernel:
    _check_keys(doc, {"shape", "halfwidth", "epsilon", "normalize",
                      "samples", "amplitude"}, {"shape"}, "kernel")
    k = kernels.from_descriptor(doc)
    if "amplitude" in doc:
        k = kernels.scale_amplitude(k, float(doc["amplitude"]))
    return k


def _reaction_from(doc: dict) -> reactions.Reaction:
    _check_keys(doc, {"name", "params"}, {"name"}, "reaction")
    return reactions.from_descriptor(doc)


def _grid_from(doc: dict):
    _check_keys(doc, {"x_left", "x_right", "h"},
                {"x_left", "x_right", "h"}, "grid")
    return float(doc["x_left"]), float(doc["x_right"]), float(doc["h"])


def _initial_field(doc: dict, x_left, x_right, h, clamps) -> Field:
    _check_keys(doc, {"type", "height", "width", "center"}, {"type"},
                "initial")
    n = int(round((x_right - x_left) / h)) + 1
    x = x_left + h * np.arange(n)
    kind = doc["type"]
    height = float(doc.get("height", 1.0))
    width = float(doc.get("width", 2.0))
    center = float(doc.get("center", 0.0))
    if kind == "step":
        vals = np.where(x <= center, height, 0.0)
    elif kind == "bump":
        z = (x - center) / width
        vals = np.where(np.abs(z) <= 1.0,
                        height * 0.5 * (1.0 + np.cos(np.pi * z)), 0.0)
    elif kind == "constant":
        vals = np.full(n, height)
    else:
        raise ConfigError(f"unknown initial type {kind!r}")
    return Field(x0=x_left, h=h, values=vals,
                 clamp_left=clamps[0], clamp_right=clamps[1])


def _evolution_from(doc: dict, lambda_star=None) -> EvolutionConfig:
    allowed = {"scheme", "dt", "t_end", "frame_speed", "log_shift",
               "record_every", "thresholds", "snapshot_every"}
    _check_keys(doc, allowed, {"dt", "t_end"}, "evolution")
    thresholds = tuple(doc.get("thresholds", (0.5,)))
    return EvolutionConfig(
        dt=float(doc["dt"]), t_end=float(doc["t_end"]),
        scheme=doc.get("scheme", "rk4_mol"),
        frame_speed=float(doc.get("frame_speed", 0.0)),
        log_shift=bool(doc.get("log_shift", False)),
        lambda_star=lambda_star,
        record_every=float(doc.get("record_every", 1.0)),
        thresholds=thresholds,
        snapshot_every=doc.get("snapshot_every"))


def cmd_speed(config: dict, out_dir: str, seed: int) -> int:
    _check_keys(config, {"kernel", "reaction"}, {"kernel", "reaction"},
                "speed config")
    k = _kernel_from(config["kernel"])
    r = _reaction_from(config["reaction"])
    rep = dispersion.critical(k, r.slope_at_zero)
    _write_json(os.path.join(out_dir, "dispersion.json"), rep.to_json())
    return 0


def cmd_simulate(config: dict, out_dir: str, seed: int) -> int:
    allowed = {"kernel", "reaction", "grid", "initial", "evolution", "fit"}
    _check_keys(config, allowed,
                {"kernel", "reaction", "grid", "initial", "evolution"},
                "simulate config")
    k = _kernel_from(config["kernel"])
    r = _reaction_from(config["reaction"])
    x_left, x_right, h = _grid_from(config["grid"])
    lam = None
    if config["evolution"].get("log_shift"):
        lam = dispersion.critical(k, r.slope_at_zero).lambda_star
    cfg = _evolution_from(config["evolution"], lambda_star=lam)
    uz = r.upper_zero if r.upper_zero is not None else 1.0
    init_doc = dict(config["initial"])
    clamp_left = uz if init_doc.get("type") == "step" else 0.0
    fld = _initial_field(init_doc, x_left, x_right, h, (clamp_left, 0.0))
    result = simulate(fld, k, r, cfg)
    for t, snap in result.snapshots:
        write_snapshot_csv(snap, os.path.join(out_dir,
                                              f"snap_t{t:.3f}.csv"))
    fit_doc = config.get("fit", {})
    t_min = float(fit_doc.get("t_min", cfg.t_end / 4.0))
    reports = {}
    for trace in result.traces:
        name = f"trace_theta{trace.theta:g}.csv"
        write_trace_csv(trace, os.path.join(out_dir, name))
        try:
            c_fit = frontfit.fit_speed(trace, t_min)
            log_fit = frontfit.fit_log_law(trace, c_fit, t_min)
            reports[f"{trace.theta:g}"] = {
                "c": c_fit, "mu": log_fit.mu_fit, "b": log_fit.b_fit,
                "rms": log_fit.rms}
        except FrontlabError as exc:
            reports[f"{trace.theta:g}"] = {"error": str(exc)}
    _write_json(os.path.join(out_dir, "fits.json"),
                {"seed": seed, "warnings": result.warnings,
                 "fits": reports})
    return 0


def cmd_wave(config: dict, out_dir: str, seed: int) -> int:
    allowed = {"kernel", "reaction", "speed", "search", "grid", "tail"}
    _check_keys(config, allowed, {"kernel", "reaction"}, "wave config")
    k = _kernel_from(config["kernel"])
    r = _reaction_from(config["reaction"])
    grid = None
    if "grid" in config:
        x_left, x_right, h = _grid_from(config["grid"])
        grid = waves.GridSpec(x_left=x_left, x_right=x_right, h=h)
    tail = config.get("tail", "auto")
    report = {}
    if "search" in config:
        doc = config["search"]
        _check_keys(doc, {"c_lo", "c_hi", "tol"},
                    {"c_lo", "c_hi", "tol"}, "search")
        c = waves.min_speed_search(k, r, float(doc["c_lo"]),
                                   float(doc["c_hi"]), float(doc["tol"]),
                                   grid=grid, tail=tail)
        report["c_star"] = c
    elif "speed" in config:
        c = float(config["speed"])
    else:
        raise ConfigError("wave config needs 'speed' or 'search'")
    prof = waves.solve_wave(k, r, c, grid=grid, tail=tail)
    waves.write_wave_csv(prof, os.path.join(out_dir, "wave.csv"))
    fit = waves.fit_tail(prof)
    report.update({"speed": prof.speed, "residual": prof.residual,
                   "tail": fit.to_json()})
    _write_json(os.path.join(out_dir, "wave.json"), report)
    return 0


def cmd_epidemic(config: dict, out_dir: str, seed: int) -> int:
    allowed = {"kernel", "S0", "beta", "alpha", "I0", "grid", "evolution"}
    _check_keys(config, allowed,
                {"kernel", "S0", "beta", "alpha", "I0", "grid",
                 "evolution"}, "epidemic config")
    p = epidemics.EpidemicParams(S0=float(config["S0"]),
                                 beta=float(config["beta"]),
                                 alpha=float(config["alpha"]))
    k = _kernel_from(config["kernel"])
    if abs(k.mass - p.beta) > 1e-8 * p.beta:
        k = kernels.scale_amplitude(k, p.beta / k.mass)
    x_left, x_right, h = _grid_from(config["grid"])
    init = _initial_field(config["I0"], x_left, x_right, h, (0.0, 0.0))
    cfg = _evolution_from(config["evolution"])
    report = {"R0": epidemics.r0(p), "seed": seed}
    if epidemics.r0(p) > 1.0:
        report["u_star"] = epidemics.u_star(p)
        report["linear_speed"] = epidemics.linearized_speed(p, k).c_K
    res = epidemics.kendall_simulate(p, k, init, cfg)
    for t, snap in res.snapshots[-1:]:
        write_snapshot_csv(snap, os.path.join(out_dir,
                                              f"snap_t{t:.3f}.csv"))
    for trace in res.traces:
        write_trace_csv(trace, os.path.join(
            out_dir, f"trace_theta{trace.theta:g}.csv"))
        mask = np.isfinite(trace.positions) & \
            (trace.times >= 0.5 * cfg.t_end)
        if mask.sum() >= 10:
            report["front_speed"] = float(np.polyfit(
                trace.times[mask], trace.positions[mask], 1)[0])
    report["monotone"] = res.monotone
    _write_json(os.path.join(out_dir, "epidemic.json"), report)
    return 0


def cmd_heatkernel(config: dict, out_dir: str, seed: int) -> int:
    allowed = {"kernel", "reaction", "lambda_star", "grid", "v0",
               "t_list", "gamma", "mode", "delta"}
    _check_keys(config, allowed, {"kernel", "grid", "t_list"},
                "heatkernel config")
    k = _kernel_from(config["kernel"])
    if "lambda_star" in config:
        lam = float(config["lambda_star"])
    elif "reaction" in config:
        r = _reaction_from(config["reaction"])
        lam = dispersion.critical(k, r.slope_at_zero).lambda_star
    else:
        raise ConfigError("heatkernel needs lambda_star or reaction")
    x_left, x_right, h = _grid_from(config["grid"])
    tk = TiltedKernel(k, lam)
    n = int(round((x_right - x_left) / h)) + 1
    grid = Field(x0=x_left, h=h, values=np.zeros(n))
    tp = heatkernel.build_symbol(tk, grid)
    v0 = _initial_field(config.get("v0", {"type": "bump", "height": 1.0,
                                          "width": 2.0, "center": 4.0}),
                        x_left, x_right, h, (0.0, 0.0))
    mode = config.get("mode", "slope_law")
    if mode == "slope_law":
        rep = heatkernel.slope_law_check(
            tp, v0, [float(t) for t in config["t_list"]],
            gamma=float(config.get("gamma", 0.2)))
    elif mode == "gaussian":
        rep = {"rows": [heatkernel.gaussian_compare(
            tp, v0, float(t), delta=float(config.get("delta", 0.05)))
            for t in config["t_list"]]}
    else:
        raise ConfigError(f"unknown heatkernel mode {mode!r}")
    rep["lambda_star"] = lam
    rep["d_star"] = tp.d_star
    _write_json(os.path.join(out_dir, "heatkernel.json"), rep)
    return 0


def cmd_fit(config: dict, out_dir: str, seed: int) -> int:
    allowed = {"trace_csv", "law", "c_known", "t_min"}
    _check_keys(config, allowed, {"trace_csv", "law"}, "fit config")
    trace = read_trace_csv(config["trace_csv"])
    law = config["law"]
    t_min = float(config.get("t_min", 0.0))
    if law == "speed":
        result = {"c": frontfit.fit_speed(trace, t_min)}
    elif law == "log_law":
        fit = frontfit.fit_log_law(trace, float(config["c_known"]), t_min)
        result = fit.to_json()
    elif law == "relaxation":
        fit = frontfit.fit_relaxation(trace, float(config["c_known"]),
                                      t_min)
        result = fit.to_json()
    else:
        raise ConfigError(f"unknown law {law!r}")
    _write_json(os.path.join(out_dir, "fit.json"), result)
    return 0


_COMMANDS = {
    "speed": cmd_speed,
    "simulate": cmd_simulate,
    "wave": cmd_wave,
    "epidemic": cmd_epidemic,
    "heatkernel": cmd_heatkernel,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Nonlocal reaction-diffusion front laboratory")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except OSError as exc:
        print(f"frontlab: cannot read config: {exc}", file=sys.stderr)
        return 4
    except json.JSONDecodeError as exc:
        print(f"frontlab: malformed JSON config: {exc}", file=sys.stderr)
        return 2

    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        print(f"frontlab: cannot create output dir: {exc}", file=sys.stderr)
        return 4

    try:
        return _COMMANDS[args.command](config, args.out, args.seed)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        print(f"frontlab: config error: {exc}", file=sys.stderr)
        return 2
    except FrontlabError as exc:
        print(f"frontlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"frontlab: I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
