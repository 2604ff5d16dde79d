"""Batch interface: config parsing, scenario presets, runs, sweeps, CSV output.

Configs are flat INI documents with sections [scenario], [mixture], [grid],
[stepper], [initial], [output].  Unknown keys are hard errors.  Initial data
are named profile primitives (constant, step, gaussian) evaluated at cell
centers; `perturb` adds a seeded multiplicative ripple.

Outputs per run:
  diagnostics.csv   one row per recorded step (time, H, energy, mass_i..,
                    fourier_dissipation, friction_dissipation, max_grad_p,
                    sup_rho_theta2, entropy_margin), the fully resolved config
                    embedded as '#' header comments
  snapshot.csv      final state (x, rho_1..rho_n, theta)
  error.json        machine-readable report, written on any failure

Exit codes: 0 success, 1 configuration error, 2 step failure, 3 invariant
violation under --strict.  Identical configs produce byte-identical CSVs
(fixed 17-significant-digit formatting, fixed summation order, no timestamps).
"""

import argparse
import concurrent.futures
import configparser
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, diagnostics, kernels, stepper
from .constitutive import MixtureParams
from .errors import ConfigError, MsntError, StepFailed, ValidationError
from .grid1d import Grid
from .stepper import StepConfig

_SECTIONS = {
    "scenario": {"preset", "name"},
    "mixture": {"n", "m", "b", "c_w", "kappa0", "kappa2", "lambda", "theta0",
                "epsilon"},
    "grid": {"cells", "length"},
    "stepper": {"tau", "steps", "newton_tol", "newton_max", "damping",
                "max_halvings", "face_averaging"},
    "initial": None,  # rho_1..rho_n, theta, perturb; checked against n
    "output": {"directory", "cadence"},
}

_PROFILE_KEYS = {
    "constant": {"value"},
    "step": {"at", "left", "right"},
    "gaussian": {"base", "amplitude", "center", "width"},
}


@dataclass(frozen=True)
class Profile:
    """Named initial-data primitive with its parameters."""

    kind: str
    args: tuple  # sorted (key, value) pairs

    def evaluate(self, x):
        kv = dict(self.args)
        if self.kind == "constant":
            return np.full_like(x, kv["value"])
        if self.kind == "step":
            return np.where(x < kv["at"], kv["left"], kv["right"])
        if self.kind == "gaussian":
            return kv["base"] + kv["amplitude"] * np.exp(
                -((x - kv["center"]) ** 2) / (2.0 * kv["width"] ** 2))
        raise ConfigError(f"unknown profile kind {self.kind!r}")

    def text(self):
        return self.kind + "".join(f" {k}={v:.17g}" for k, v in self.args)


@dataclass
class RunConfig:
    scenario: str
    params: MixtureParams
    grid: Grid
    step: StepConfig
    steps: int
    profiles: dict          # "rho_1".."rho_n", "theta" -> Profile
    perturb: float
    output_dir: str
    cadence: int


def parse_profile(spec):
    parts = spec.split()
    if not parts:
        raise ConfigError("empty profile specification")
    kind = parts[0]
    if kind not in _PROFILE_KEYS:
        raise ConfigError(f"unknown profile {kind!r}; pick one of "
                          f"{sorted(_PROFILE_KEYS)}")
    kv = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ConfigError(f"malformed profile parameter {tok!r} (need key=value)")
        k, v = tok.split("=", 1)
        try:
            kv[k] = float(v)
        except ValueError:
            raise ConfigError(f"profile parameter {k}={v!r} is not a number")
    if set(kv) != _PROFILE_KEYS[kind]:
        raise ConfigError(f"profile {kind!r} needs exactly the parameters "
                          f"{sorted(_PROFILE_KEYS[kind])}, got {sorted(kv)}")
    return Profile(kind=kind, args=tuple(sorted(kv.items())))


def _floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _friction_matrix(n, text):
    vals = _floats(text)
    b = np.zeros((n, n))
    if len(vals) == 1:
        b[:] = vals[0]
        np.fill_diagonal(b, 0.0)
        return b
    need = n * (n - 1) // 2
    if len(vals) != need:
        raise ConfigError(f"friction list needs 1 or {need} values "
                          f"(upper triangle row-major), got {len(vals)}")
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            b[i, j] = b[j, i] = vals[k]
            k += 1
    return b


def parse_config(text):
    """Parse and validate a config document into a RunConfig."""
    probe = configparser.ConfigParser(interpolation=None,
                                      inline_comment_prefixes=("#",))
    try:
        probe.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}")

    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#",))
    scenario = "custom"
    if probe.has_option("scenario", "preset"):
        preset = probe.get("scenario", "preset")
        if preset not in PRESETS:
            raise ConfigError(f"unknown scenario preset {preset!r}; "
                              f"available: {sorted(PRESETS)}")
        scenario = preset
        cp.read_string(PRESETS[preset])
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}")
    if cp.has_option("scenario", "name"):
        scenario = cp.get("scenario", "name")

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SECTIONS[section]
        if allowed is not None:
            for key in cp.options(section):
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")

    def get(section, key, default=None, cast=float):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                return cast(raw)
            except ValueError:
                raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid "
                                  f"{cast.__name__}")
        if default is None:
            raise ConfigError(f"missing required key {key!r} in [{section}]")
        return default

    n = get("mixture", "n", cast=int)
    if not cp.has_option("mixture", "m"):
        raise ConfigError("missing required key 'm' in [mixture]")
    m = _floats(cp.get("mixture", "m"))
    if len(m) != n:
        raise ConfigError(f"need {n} molar masses, got {len(m)}")
    b = _friction_matrix(n, cp.get("mixture", "b", fallback="1.0"))
    params = MixtureParams(
        n=n, m=np.array(m), b=b,
        c_w=get("mixture", "c_w", 1.0),
        kappa0=get("mixture", "kappa0", 1.0),
        kappa2=get("mixture", "kappa2", 1.0),
        lam=get("mixture", "lambda", 0.0),
        theta0=get("mixture", "theta0", 1.0),
        epsilon=get("mixture", "epsilon", 0.0),
    )
    grid = Grid(N=get("grid", "cells", 32, cast=int),
                length=get("grid", "length", 1.0))
    step = StepConfig(
        tau=get("stepper", "tau", 1e-3),
        newton_tol=get("stepper", "newton_tol", 1e-11),
        newton_max=get("stepper", "newton_max", 30, cast=int),
        damping=get("stepper", "damping", 0.5),
        max_halvings=get("stepper", "max_halvings", 8, cast=int),
        face_averaging=get("stepper", "face_averaging", "arithmetic", cast=str),
    )
    steps = get("stepper", "steps", 100, cast=int)

    profiles = {}
    wanted = [f"rho_{i + 1}" for i in range(n)] + ["theta"]
    if not cp.has_section("initial"):
        raise ConfigError("missing [initial] section")
    for key in cp.options("initial"):
        if key == "perturb":
            continue
        if key not in wanted:
            raise ConfigError(f"unknown key {key!r} in [initial] "
                              f"(expected {wanted} and optional 'perturb')")
        profiles[key] = parse_profile(cp.get("initial", key))
    missing = [k for k in wanted if k not in profiles]
    if missing:
        raise ConfigError(f"missing initial profiles for {missing}")
    perturb = get("initial", "perturb", 0.0)

    output_dir = cp.get("output", "directory", fallback="msnt-out")
    cadence = get("output", "cadence", 1, cast=int)
    if cadence < 1:
        raise ConfigError("output cadence must be >= 1")

    return RunConfig(scenario=scenario, params=params, grid=grid, step=step,
                     steps=steps, profiles=profiles, perturb=perturb,
                     output_dir=output_dir, cadence=cadence)


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")


def config_text(cfg):
    """Canonical INI serialization of a fully resolved config."""
    p = cfg.params
    off = [f"{p.b[i, j]:.17g}" for i in range(p.n) for j in range(i + 1, p.n)]
    lines = [
        "[scenario]", f"name = {cfg.scenario}", "",
        "[mixture]", f"n = {p.n}",
        "m = " + ", ".join(f"{v:.17g}" for v in p.m),
        "b = " + ", ".join(off),
        f"c_w = {p.c_w:.17g}", f"kappa0 = {p.kappa0:.17g}",
        f"kappa2 = {p.kappa2:.17g}", f"lambda = {p.lam:.17g}",
        f"theta0 = {p.theta0:.17g}", f"epsilon = {p.epsilon:.17g}", "",
        "[grid]", f"cells = {cfg.grid.N}", f"length = {cfg.grid.length:.17g}", "",
        "[stepper]", f"tau = {cfg.step.tau:.17g}", f"steps = {cfg.steps}",
        f"newton_tol = {cfg.step.newton_tol:.17g}",
        f"newton_max = {cfg.step.newton_max}",
        f"damping = {cfg.step.damping:.17g}",
        f"max_halvings = {cfg.step.max_halvings}",
        f"face_averaging = {cfg.step.face_averaging}", "",
        "[initial]",
    ]
    for i in range(p.n):
        lines.append(f"rho_{i + 1} = " + cfg.profiles[f"rho_{i + 1}"].text())
    lines.append("theta = " + cfg.profiles["theta"].text())
    lines.append(f"perturb = {cfg.perturb:.17g}")
    lines += ["", "[output]", f"directory = {cfg.output_dir}",
              f"cadence = {cfg.cadence}"]
    return "\n".join(lines) + "\n"


def initial_fields(cfg, seed=0):
    """Evaluate the initial profiles (plus seeded perturbation) on the grid."""
    x = cfg.grid.cell_centers
    rho = np.stack([cfg.profiles[f"rho_{i + 1}"].evaluate(x)
                    for i in range(cfg.params.n)], axis=1)
    theta = cfg.profiles["theta"].evaluate(x)
    if cfg.perturb > 0:
        rng = np.random.default_rng(seed)
        rho = rho * (1.0 + cfg.perturb * rng.uniform(-1.0, 1.0, rho.shape))
        theta = theta * (1.0 + cfg.perturb * rng.uniform(-1.0, 1.0, theta.shape))
    if np.any(rho < 0):
        raise ValidationError("initial densities must be nonnegative",
                              assumption="(A2)")
    if theta.min() <= 0:
        raise ValidationError("initial temperature must satisfy inf theta > 0",
                              assumption="(A2)")
    return rho, theta


def _fmt(x):
    return f"{x:.17g}"


def _write_error(output_dir, kind, message, **details):
    payload = {"error": {"type": kind, "message": message, **details}}
    try:
        os.makedirs(output_dir, exist_ok=True)
        with open(os.path.join(output_dir, "error.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError:
        json.dump(payload, sys.stderr)
    return payload


class _InvariantViolation(Exception):
    def __init__(self, name, message):
        super().__init__(message)
        self.name = name


def _strict_checks(cfg, rec0, prev_rec, rec, state, raw_margin):
    p = cfg.params
    slack = cfg.step.entropy_slack
    if rec.fourier_dissipation < 0 or rec.friction_dissipation < 0:
        raise _InvariantViolation("dissipation-nonnegative",
                                  "negative dissipation recorded")
    if p.lam == 0 and p.epsilon == 0:
        if raw_margin < -slack:
            raise _InvariantViolation(
                "entropy-inequality",
                f"entropy margin {raw_margin:.3e} below -{slack:.3e} "
                f"at t = {rec.time:.6g}")
        drift = abs(rec.energy - rec0.energy)
        if drift > 1e-8 * max(abs(rec0.energy), 1e-300):
            raise _InvariantViolation(
                "energy-conservation",
                f"energy drift {drift:.3e} at t = {rec.time:.6g}")
    if p.epsilon == 0:
        mass_drift = np.abs(rec.masses - rec0.masses)
        bound = 1e-10 * np.maximum(rec0.masses, 1e-300)
        if np.any(mass_drift > bound):
            raise _InvariantViolation(
                "mass-conservation",
                f"species mass drift {mass_drift.max():.3e} at t = {rec.time:.6g}")
    rho, _ = state.recover(cfg.params)
    dev = np.abs(rho.sum(axis=1) - state.rho_total).max()
    if dev > 1e-12 * state.rho_total.max():
        raise _InvariantViolation(
            "total-density-invariance",
            f"recovered total density deviates by {dev:.3e}")


def run(cfg, strict=False, seed=0, return_state=False):
    """Execute the time loop of one configuration; returns the exit status."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    header = [f"# msnt {__version__} diagnostics (kernel backend: "
              f"{kernels.backend_name()})"]
    header += ["# " + line for line in config_text(cfg).splitlines()]

    try:
        rho0, theta0 = initial_fields(cfg, seed=seed)
        state = stepper.initial_state(cfg.params, cfg.grid, rho0, theta0)
    except ValidationError as exc:
        _write_error(cfg.output_dir, "ValidationError", str(exc),
                     assumption=exc.assumption)
        raise
    rec = diagnostics.compute_record(cfg.params, cfg.grid, state,
                                     face_averaging=cfg.step.face_averaging)
    rec0, prev_rec = rec, rec
    sup_rt2 = rec.rho_theta2
    n = cfg.params.n
    columns = (["time", "H", "energy"] + [f"mass_{i + 1}" for i in range(n)]
               + ["fourier_dissipation", "friction_dissipation", "max_grad_p",
                  "sup_rho_theta2", "entropy_margin"])

    diag_path = os.path.join(cfg.output_dir, "diagnostics.csv")
    status = 0
    with open(diag_path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        fh.write(",".join(columns) + "\n")

        def emit(rec, margin):
            row = ([rec.time, rec.entropy, rec.energy] + list(rec.masses)
                   + [rec.fourier_dissipation, rec.friction_dissipation,
                      rec.max_grad_p, sup_rt2, margin])
            fh.write(",".join(_fmt(v) for v in row) + "\n")

        emit(rec, 0.0)
        try:
            for k in range(cfg.steps):
                state, rec = stepper.step(cfg.params, cfg.grid, cfg.step, state)
                sup_rt2 = max(sup_rt2, rec.rho_theta2)
                margin = diagnostics.entropy_margin(prev_rec, rec, cfg.step.tau)
                if strict:
                    _strict_checks(cfg, rec0, prev_rec, rec, state, margin)
                if (k + 1) % cfg.cadence == 0 or k + 1 == cfg.steps:
                    emit(rec, margin)
                prev_rec = rec
        except StepFailed as exc:
            _write_error(cfg.output_dir, "StepFailed", str(exc),
                         time=exc.time, residual_norm=exc.residual_norm,
                         halvings=exc.halvings)
            status = 2
        except _InvariantViolation as exc:
            _write_error(cfg.output_dir, "InvariantViolation", str(exc),
                         invariant=exc.name, time=rec.time)
            status = 3

    if status == 0:
        rho, theta = state.recover(cfg.params)
        with open(os.path.join(cfg.output_dir, "snapshot.csv"), "w") as fh:
            fh.write("\n".join(header) + "\n")
            fh.write(",".join(["x"] + [f"rho_{i + 1}" for i in range(n)]
                              + ["theta"]) + "\n")
            for k, x in enumerate(cfg.grid.cell_centers):
                fh.write(",".join(_fmt(v) for v in
                                  [x, *rho[k], theta[k]]) + "\n")
    if return_state:
        return status, state
    return status


_SWEEP_PARAMS = ("tau", "N", "epsilon", "lambda")


def _apply_sweep_value(cfg, parameter, value):
    if parameter == "tau":
        # preserve the time horizon steps * tau across the sweep
        horizon = cfg.steps * cfg.step.tau
        steps = max(1, round(horizon / float(value)))
        return dataclasses.replace(cfg, steps=steps,
                                   step=dataclasses.replace(cfg.step,
                                                            tau=float(value)))
    if parameter == "N":
        return dataclasses.replace(cfg, grid=Grid(N=int(value),
                                                  length=cfg.grid.length))
    if parameter == "epsilon":
        return dataclasses.replace(cfg, params=dataclasses.replace(
            cfg.params, epsilon=float(value)))
    if parameter == "lambda":
        return dataclasses.replace(cfg, params=dataclasses.replace(
            cfg.params, lam=float(value)))
    raise ConfigError(f"sweep parameter must be one of {_SWEEP_PARAMS}")


def sweep(cfg, parameter, values, strict=False, seed=0):
    """Run one independent trajectory per parameter value plus a summary CSV.

    Per-run failures are recorded and the sweep continues; the exit status is
    nonzero if any run failed.  MSNT_THREADS caps the worker count.
    """
    if parameter not in _SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {_SWEEP_PARAMS}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    os.makedirs(cfg.output_dir, exist_ok=True)

    jobs = []
    for value in values:
        sub = _apply_sweep_value(cfg, parameter, value)
        sub = dataclasses.replace(sub, output_dir=os.path.join(
            cfg.output_dir, f"{parameter}={value:g}"))
        jobs.append((value, sub))

    env_threads = os.environ.get("MSNT_THREADS")
    workers = int(env_threads) if env_threads else min(len(jobs),
                                                       os.cpu_count() or 1)
    workers = max(1, workers)

    def one(job):
        value, sub = job
        t0 = time.perf_counter()
        try:
            code, final = run(sub, strict=strict, seed=seed, return_state=True)
        except MsntError as exc:
            _write_error(sub.output_dir, type(exc).__name__, str(exc))
            return {"value": value, "cfg": sub, "status": 4, "final": None,
                    "wall": time.perf_counter() - t0}
        return {"value": value, "cfg": sub, "status": code,
                "final": final if code == 0 else None,
                "wall": time.perf_counter() - t0}

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, jobs))

    # reference = the most resolved run: smallest tau/epsilon/lambda, largest N
    def rank(res):
        return -res["value"] if parameter == "N" else res["value"]

    ok = [r for r in results if r["status"] == 0]
    reference = min(ok, key=rank) if ok else None

    def rel_entropy_vs_reference(res):
        if reference is None or res["final"] is None:
            return float("nan")
        if res is reference:
            return 0.0
        ref_state, ref_cfg = reference["final"], reference["cfg"]
        state, sub_cfg = res["final"], res["cfg"]
        if ref_cfg.grid.N == sub_cfg.grid.N:
            return diagnostics.relative_entropy(sub_cfg.params, sub_cfg.grid,
                                                state, ref_state)
        if ref_cfg.grid.N % sub_cfg.grid.N == 0:
            factor = ref_cfg.grid.N // sub_cfg.grid.N
            return diagnostics.relative_entropy_restricted(
                sub_cfg.params, sub_cfg.grid, state, ref_state, factor)
        return float("nan")

    with open(os.path.join(cfg.output_dir, "summary.csv"), "w") as fh:
        fh.write(f"# msnt {__version__} sweep over {parameter}\n")
        fh.write("value,status,final_H,final_relative_entropy_vs_finest,"
                 "wall_time_s\n")
        for res in results:
            if res["final"] is not None:
                H = diagnostics.total_entropy(res["cfg"].params,
                                              res["cfg"].grid, res["final"])
            else:
                H = float("nan")
            fh.write(",".join([
                _fmt(res["value"]), str(res["status"]), _fmt(H),
                _fmt(rel_entropy_vs_reference(res)), f"{res['wall']:.3f}",
            ]) + "\n")

    return 0 if all(r["status"] == 0 for r in results) else 2


DEFAULT_CONFIG = """\
# msnt run configuration (all keys shown with their defaults where they exist)
[scenario]
# preset = two-species-mixing   # start from a named preset, then override

[mixture]
n = 2
m = 1.0, 2.0
b = 1.0              # scalar, or upper-triangle list b_12, b_13, ..., b_23, ...
c_w = 1.0
kappa0 = 1.0
kappa2 = 1.0
lambda = 0.0
theta0 = 1.0
epsilon = 0.0        # > 0 enables the experimental regularized scheme

[grid]
cells = 32
length = 1.0

[stepper]
tau = 1e-3
steps = 100
newton_tol = 1e-11
newton_max = 30
damping = 0.5
max_halvings = 8
face_averaging = arithmetic   # or harmonic

[initial]
rho_1 = constant value=0.5
rho_2 = constant value=0.5
theta = constant value=1.0
perturb = 0.0        # relative amplitude of seeded per-cell noise (--seed)

[output]
directory = msnt-out
cadence = 1
"""

PRESETS = {
    "uniform-rest": """\
[mixture]
n = 2
m = 1.0, 2.0
b = 1.0
c_w = 1.5
kappa0 = 1.0
kappa2 = 1.0
lambda = 0.0
theta0 = 1.0

[grid]
cells = 16
length = 1.0

[stepper]
tau = 1e-3
steps = 100
newton_tol = 1e-12

[initial]
rho_1 = constant value=0.6
rho_2 = constant value=0.6
theta = constant value=1.3

[output]
directory = msnt-out/uniform-rest
""",
    "two-species-mixing": """\
[mixture]
n = 3
m = 1.0, 2.0, 1.5
b = 1.0, 2.0, 1.5
c_w = 1.5
kappa0 = 1.0
kappa2 = 0.5
lambda = 0.0
theta0 = 1.0

[grid]
cells = 100
length = 1.0

[stepper]
tau = 1e-3
steps = 1000
newton_tol = 1e-11

[initial]
rho_1 = gaussian base=0.30 amplitude=0.25 center=0.35 width=0.10
rho_2 = gaussian base=0.30 amplitude=0.25 center=0.65 width=0.10
rho_3 = constant value=0.40
theta = gaussian base=1.00 amplitude=0.40 center=0.50 width=0.15

[output]
directory = msnt-out/two-species-mixing
""",
    "robin-cooling": """\
[mixture]
n = 2
m = 1.0, 1.0
b = 1.0
c_w = 1.0
kappa0 = 1.0
kappa2 = 1.0
lambda = 1.0
theta0 = 1.0

[grid]
cells = 1
length = 1.0

[stepper]
tau = 1e-2
steps = 100
newton_tol = 1e-13

[initial]
rho_1 = constant value=0.5
rho_2 = constant value=0.5
theta = constant value=2.0

[output]
directory = msnt-out/robin-cooling
""",
    "equilibration": """\
[mixture]
n = 2
m = 1.0, 2.0
b = 0.8
c_w = 1.5
kappa0 = 1.0
kappa2 = 1.0
lambda = 0.0
theta0 = 1.0

[grid]
cells = 40
length = 1.0

[stepper]
tau = 1e-3
steps = 1500
newton_tol = 1e-11

[initial]
rho_1 = gaussian base=0.75 amplitude=0.20 center=0.40 width=0.12
rho_2 = gaussian base=0.75 amplitude=-0.20 center=0.40 width=0.12
theta = gaussian base=1.00 amplitude=0.30 center=0.60 width=0.15

[output]
directory = msnt-out/equilibration
""",
    "weak-strong": """\
[mixture]
n = 2
m = 1.0, 2.0
b = 0.8
c_w = 1.5
kappa0 = 1.0
kappa2 = 1.0
lambda = 0.0
theta0 = 1.0

[grid]
cells = 32
length = 1.0

[stepper]
tau = 2e-3
steps = 40
newton_tol = 1e-11

[initial]
rho_1 = gaussian base=0.75 amplitude=0.15 center=0.45 width=0.14
rho_2 = gaussian base=0.75 amplitude=-0.15 center=0.45 width=0.14
theta = gaussian base=1.00 amplitude=0.20 center=0.55 width=0.16

[output]
directory = msnt-out/weak-strong
""",
}


def preset_config(name):
    """Full config text of a named preset."""
    if name not in PRESETS:
        raise ConfigError(f"unknown scenario preset {name!r}; "
                          f"available: {sorted(PRESETS)}")
    return PRESETS[name]


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="msnt",
        description="Nonisothermal Maxwell-Stefan finite-volume solver")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print a fully documented default config and exit")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config", help="path to an INI config file")
    p_run.add_argument("--strict", action="store_true",
                       help="exit 3 when a structural invariant is violated")
    p_run.add_argument("--seed", type=int, default=0,
                       help="seed for random initial perturbations")

    p_sweep = sub.add_parser("sweep", help="run one trajectory per parameter value")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, choices=_SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    p_sweep.add_argument("--strict", action="store_true")
    p_sweep.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.print_defaults:
        print(DEFAULT_CONFIG, end="")
        return 0
    if args.command is None:
        parser.print_help()
        return 1
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            return run(cfg, strict=args.strict, seed=args.seed)
        values = _floats(args.values)
        return sweep(cfg, args.param, values, strict=args.strict, seed=args.seed)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StepFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
