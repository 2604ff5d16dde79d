#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot operations (batched state recovery, interior-face flux
assembly) and a full implicit step on the mixing preset, for every available
backend.

Usage: python benchmarks/bench_kernels.py [--repeats R]
"""

import argparse
import importlib
import os
import time

import numpy as np

from msnt import cli, kernels, stepper


def timeit(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def kernel_workload(n=3, N=100, seed=0):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.8, 2.5, n)
    b = rng.uniform(0.5, 2.0, (n, n))
    b = 0.5 * (b + b.T)
    np.fill_diagonal(b, 0.0)
    rho = rng.uniform(0.2, 2.0, (N, n))
    logs = np.log(rho / m) / m
    W = np.empty((N, n))
    W[:, :-1] = logs[:, :-1] - logs[:, -1:]
    W[:, -1] = rng.uniform(-0.5, 0.5, N)
    rho_f = 0.5 * (rho[:-1] + rho[1:])
    theta = np.exp(W[:, -1])
    gw = rng.standard_normal((N - 1, n - 1))
    gwlog = rng.standard_normal(N - 1)
    return m, b, rho, W, rho_f, theta, gw, gwlog


def step_workload():
    cfg = cli.parse_config(cli.preset_config("two-species-mixing"))
    rho0, th0 = cli.initial_fields(cfg)
    state = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    return cfg, state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    backends = kernels.available_backends()
    m, b, rho, W, rho_f, theta, gw, gwlog = kernel_workload()
    rho_total = rho.sum(axis=1)

    rows = []
    for name in backends:
        impl = kernels.get_backend(name)
        t_rec = timeit(lambda: impl.recover_states(m, rho_total, W), args.repeats)
        t_flux = timeit(lambda: impl.face_fluxes(m, b, 1.0, 0.5, rho_f,
                                                 theta[:-1], theta[1:], gw, gwlog),
                        args.repeats)
        rows.append((name, t_rec, t_flux))

    print(f"{'backend':<10} {'recover_states':>16} {'face_fluxes':>14}")
    for name, t_rec, t_flux in rows:
        print(f"{name:<10} {t_rec * 1e6:>13.1f} us {t_flux * 1e6:>11.1f} us")
    if len(rows) == 2:
        print(f"{'speedup':<10} {rows[1][1] / rows[0][1]:>13.1f} x  "
              f"{rows[1][2] / rows[0][2]:>10.1f} x")

    print()
    print("full implicit step, mixing preset (n=3, N=100):")
    step_times = {}
    for name in backends:
        os.environ["MSNT_KERNEL"] = name
        importlib.reload(kernels)
        cfg, state = step_workload()
        reps = max(3, args.repeats // 20)

        def one_step():
            stepper.step(cfg.params, cfg.grid, cfg.step, state,
                         with_diagnostics=False)

        step_times[name] = timeit(one_step, reps)
        print(f"  {name:<10} {step_times[name] * 1e3:8.1f} ms/step")
    if len(step_times) == 2:
        print(f"  speedup    {step_times['python'] / step_times['compiled']:8.1f} x")
    os.environ.pop("MSNT_KERNEL", None)
    importlib.reload(kernels)


if __name__ == "__main__":
    main()
