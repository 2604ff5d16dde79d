"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
All tolerances are fixed here, not calibrated at runtime.
"""

import dataclasses
import time

import numpy as np
import pytest

from msnt import cli, diagnostics, msalgebra, stepper
from msnt import constitutive as cst
from msnt.constitutive import LocalState
from msnt.grid1d import Grid

from conftest import random_params


def _report(criterion, ok, detail):
    print(f"[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})",
          flush=True)
    assert ok, f"criterion {criterion}: {detail}"


# --------------------------------------------------------------- criterion 1

def test_c1_algebra_suite():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = {"kernel": 0.0, "bd_kernel": 0.0, "sym": 0.0, "inverse": 0.0,
             "posdef_M": np.inf, "posdef_BD": np.inf}
    for _ in range(1000):
        p = random_params(rng, b_range=(0.1, 10.0))
        rho = rng.uniform(1e-4, 10.0, p.n)
        sq = np.sqrt(rho)
        M = msalgebra.build_M(p, rho)
        P_L, P_perp = msalgebra.projections(rho)
        B = msalgebra.bott_duffin(M, P_L, P_perp)
        scale = max(np.abs(M).max(), 1.0)
        bscale = max(np.abs(B).max(), 1.0)
        worst["kernel"] = max(worst["kernel"], np.abs(M @ sq).max() / scale)
        worst["bd_kernel"] = max(worst["bd_kernel"], np.abs(B @ sq).max() / bscale)
        worst["sym"] = max(worst["sym"], np.abs(B - B.T).max() / bscale)
        z = P_L @ rng.standard_normal(p.n)
        worst["inverse"] = max(worst["inverse"],
                               np.abs(B @ (M @ z) - z).max() / max(1.0, np.abs(z).max()))
        # explicit constants mu_M = min b_ij, mu = (2 sum_{i != j}(b_ij+1))^-1
        # hold at unit total density; they scale homogeneously with the total
        off = ~np.eye(p.n, dtype=bool)
        mu_M = p.b[off].min()
        mu = 1.0 / (2.0 * np.sum(p.b[off] + 1.0))
        rtot = rho.sum()
        z = rng.standard_normal(p.n)
        pz2 = float(np.dot(P_L @ z, P_L @ z))
        worst["posdef_M"] = min(worst["posdef_M"],
                                z @ M @ z - rtot * mu_M * pz2)
        worst["posdef_BD"] = min(worst["posdef_BD"],
                                 z @ B @ z - (mu / rtot) * pz2)
        # and literally at unit total density
        rho_u = rho / rtot
        Mu = msalgebra.build_M(p, rho_u)
        PLu, Ppu = msalgebra.projections(rho_u)
        Bu = msalgebra.bott_duffin(Mu, PLu, Ppu)
        pz2u = float(np.dot(PLu @ z, PLu @ z))
        worst["posdef_M"] = min(worst["posdef_M"], z @ Mu @ z - mu_M * pz2u)
        worst["posdef_BD"] = min(worst["posdef_BD"], z @ Bu @ z - mu * pz2u)
    elapsed = time.perf_counter() - t0
    ok = (worst["kernel"] <= 1e-13 and worst["bd_kernel"] <= 1e-10
          and worst["sym"] <= 1e-10 and worst["inverse"] <= 1e-10
          and worst["posdef_M"] >= -1e-10 and worst["posdef_BD"] >= -1e-10
          and elapsed < 5.0)
    _report(1, ok, f"worst residuals {worst}, {elapsed:.2f}s")


# --------------------------------------------------------------- criterion 2

def test_c2_onsager_suite():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    worst_sum = 0.0
    worst_psd = np.inf
    worst_flux = 0.0
    for _ in range(10000):
        p = random_params(rng, b_range=(0.1, 10.0))
        rho = rng.uniform(1e-4, 10.0, p.n)
        theta = float(rng.uniform(0.1, 10.0))
        A, B, a = msalgebra.onsager(p, rho, theta)
        scale = max(np.abs(A).max(), np.abs(B).max(), 1.0)
        worst_sum = max(worst_sum, np.abs(A.sum(axis=0)).max() / scale,
                        np.abs(A.sum(axis=1)).max() / scale,
                        abs(B.sum()) / scale)
        n = p.n
        Q = np.empty((n + 1, n + 1))
        Q[:n, :n] = A
        Q[:n, n] = Q[n, :n] = B
        Q[n, n] = a
        xi = rng.standard_normal(n + 1)
        lower = float(p.kappa(theta)) * theta**2 * xi[-1] ** 2
        worst_psd = min(worst_psd, float(xi @ Q @ xi) - lower)
    rng2 = np.random.default_rng(203)
    for _ in range(300):
        p = random_params(rng2)
        rho = rng2.uniform(1e-2, 10.0, p.n)
        theta = float(rng2.uniform(0.1, 10.0))
        gq = rng2.standard_normal(p.n)
        gw = float(rng2.standard_normal())
        loc = msalgebra.ms_local(p, rho, theta)
        J1 = -(loc.A @ gq) - (loc.B / theta) * gw
        J2 = -(loc.A @ (gq + gw / p.m))
        d = rho * theta * (gq + (p.c_w + 1.0 / p.m) * gw)
        u = -(loc.M_BD @ (d / (theta * np.sqrt(rho)))) / np.sqrt(rho)
        J3 = rho * u
        scale = max(np.abs(J1).max(), 1.0)
        worst_flux = max(worst_flux, np.abs(J1 - J2).max() / scale,
                         np.abs(J1 - J3).max() / scale)
    elapsed = time.perf_counter() - t0
    ok = (worst_sum <= 1e-12 and worst_psd >= -1e-10 and worst_flux <= 1e-10
          and elapsed < 5.0)
    _report(2, ok, f"sum {worst_sum:.2e}, psd margin {worst_psd:.2e}, "
                   f"flux gap {worst_flux:.2e}, {elapsed:.2f}s")


# --------------------------------------------------------------- criterion 3

def test_c3_constitutive_roundtrip():
    rng = np.random.default_rng(303)
    worst_rt = 0.0
    for _ in range(10000):
        p = random_params(rng)
        rho = np.exp(rng.uniform(np.log(1e-6), np.log(1e3), p.n))
        theta = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        s = LocalState(rho=rho, theta=theta)
        ev = cst.entropy_vars_from_state(p, s)
        back = cst.state_from_entropy_vars(p, ev, s.rho_total)
        worst_rt = max(worst_rt, float(np.abs((back.rho - rho) / rho).max()),
                       abs(back.theta - theta) / theta)
    worst_gd = 0.0
    worst_fd = 0.0
    for _ in range(200):
        p = random_params(rng)
        rho = rng.uniform(1e-2, 1e2, p.n)
        theta = float(rng.uniform(0.1, 10.0))
        mu = cst.chemical_potential(p, rho, theta)
        psi = cst.free_energy(p, rho, theta)
        pp = cst.partial_pressure(p, rho, theta)
        worst_gd = max(worst_gd,
                       float(np.abs(pp - (rho * mu - psi)).max()
                             / max(1.0, np.abs(pp).max())))
        h = 1e-6
        for i in range(p.n):
            up = rho.copy(); up[i] += h
            dn = rho.copy(); dn[i] -= h
            fd = (cst.free_energy(p, up, theta)[i]
                  - cst.free_energy(p, dn, theta)[i]) / (2 * h)
            worst_fd = max(worst_fd, abs(fd - mu[i]) / max(abs(mu[i]), 1.0))
    ok = worst_rt <= 1e-12 and worst_gd <= 1e-6 and worst_fd <= 1e-6
    _report(3, ok, f"roundtrip {worst_rt:.2e}, Gibbs-Duhem {worst_gd:.2e}, "
                   f"mu FD {worst_fd:.2e}")


# ------------------------------------------------- criteria 4 and 5 (one run)

@pytest.fixture(scope="module")
def mixing_run():
    cfg = cli.parse_config(cli.preset_config("two-species-mixing"))
    rho0, th0 = cli.initial_fields(cfg)
    state = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    rec = diagnostics.compute_record(cfg.params, cfg.grid, state)
    records = [rec]
    margins = []
    t0 = time.perf_counter()
    for _ in range(cfg.steps):
        state, new = stepper.step(cfg.params, cfg.grid, cfg.step, state)
        margins.append(diagnostics.entropy_margin(rec, new, cfg.step.tau))
        records.append(new)
        rec = new
    elapsed = time.perf_counter() - t0
    rho, _ = state.recover(cfg.params)
    dev_total = float(np.abs(rho.sum(axis=1) - state.rho_total).max()
                      / state.rho_total.max())
    return cfg, records, margins, elapsed, dev_total


def test_c4_conservation(mixing_run):
    cfg, records, _, elapsed, dev_total = mixing_run
    m0 = records[0].masses
    e0 = records[0].energy
    mass_drift = max(float(np.abs(r.masses - m0).max() / m0.min())
                     for r in records)
    energy_drift = max(abs(r.energy - e0) / abs(e0) for r in records)
    ok = (mass_drift <= 1e-10 and energy_drift <= 1e-8 and dev_total <= 1e-12
          and elapsed < 60.0)
    _report(4, ok, f"mass drift {mass_drift:.2e}, energy drift {energy_drift:.2e}, "
                   f"total-density dev {dev_total:.2e}, {elapsed:.1f}s / 1000 steps")


def test_c5_entropy_dissipation(mixing_run):
    cfg, records, margins, _, _ = mixing_run
    slack = cfg.step.entropy_slack
    min_margin = min(margins)
    diss_ok = all(r.fourier_dissipation >= 0 and r.friction_dissipation >= 0
                  for r in records)
    ok = min_margin >= -slack and diss_ok
    _report(5, ok, f"min margin {min_margin:.3e} (slack {slack:.1e}), "
                   f"dissipations nonnegative: {diss_ok}")


def test_temperature_estimate_stays_bounded(mixing_run):
    # discrete analogue of the a-priori temperature bound: the supremum of
    # integral rho theta^2 over the run stays within 10x its initial value
    _, records, _, _, _ = mixing_run
    sup = max(r.rho_theta2 for r in records)
    assert sup <= 10.0 * records[0].rho_theta2


# --------------------------------------------------------------- criterion 6

def test_c6_lumped_robin_oracle():
    cfg = cli.parse_config(cli.preset_config("robin-cooling"))
    rho0, th0 = cli.initial_fields(cfg)
    state = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    gamma = 2.0 * cfg.params.lam / (cfg.params.c_w * float(state.rho_total[0])
                                    * cfg.grid.length)
    theta_ref = th0[0]
    worst = 0.0
    for _ in range(100):
        state, _ = stepper.step(cfg.params, cfg.grid, cfg.step, state)
        theta_ref = (theta_ref + gamma * cfg.step.tau * cfg.params.theta0) \
            / (1.0 + gamma * cfg.step.tau)
        _, theta = state.recover(cfg.params)
        worst = max(worst, abs(float(theta[0]) - theta_ref))
    ok = worst <= 1e-10
    _report(6, ok, f"max deviation from closed form {worst:.2e} over 100 steps")


# --------------------------------------------------------------- criterion 7

def test_c7_long_time_equilibration():
    cfg = cli.parse_config(cli.preset_config("equilibration"))
    rho0, th0 = cli.initial_fields(cfg)
    state = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    eq = diagnostics.equilibrium_state(cfg.params, cfg.grid, state)
    slack = cfg.step.entropy_slack
    rel = diagnostics.relative_entropy(cfg.params, cfg.grid, state, eq)
    monotone = True
    reached = False
    for _ in range(cfg.steps):
        state, _ = stepper.step(cfg.params, cfg.grid, cfg.step, state,
                                with_diagnostics=False)
        new_rel = diagnostics.relative_entropy(cfg.params, cfg.grid, state, eq)
        if new_rel > rel + slack:
            monotone = False
        rel = new_rel
        if rel < 1e-8:
            reached = True
            break
    ok = monotone and reached
    _report(7, ok, f"relative entropy {rel:.2e} at t = {state.time:.3f}, "
                   f"monotone within slack: {monotone}")


# --------------------------------------------------------------- criterion 8

def test_c8_weak_strong_experiment():
    cfg = cli.parse_config(cli.preset_config("weak-strong"))
    rho0, th0 = cli.initial_fields(cfg)
    rep = diagnostics.weak_strong_experiment(
        cfg.params, cfg.grid, Grid(N=2 * cfg.grid.N, length=cfg.grid.length),
        cfg.step, rho0, th0, cfg.steps, refinement_check=True)

    # identical-resolution twin runs
    st_a = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    st_b = stepper.initial_state(cfg.params, cfg.grid, rho0, th0)
    for _ in range(10):
        st_a, _ = stepper.step(cfg.params, cfg.grid, cfg.step, st_a,
                               with_diagnostics=False)
        st_b, _ = stepper.step(cfg.params, cfg.grid, cfg.step, st_b,
                               with_diagnostics=False)
    twin = diagnostics.relative_entropy(cfg.params, cfg.grid, st_a, st_b)
    ok = rep.refinement_ratio >= 1.5 and twin <= 1e-12
    _report(8, ok, f"refinement ratio {rep.refinement_ratio:.2f} (>= 1.5), "
                   f"twin-run relative entropy {twin:.1e}")


# --------------------------------------------------------------- criterion 9

def test_c9_newton_integrity():
    rng = np.random.default_rng(909)
    p = random_params(rng, n=3, m_range=(1.0, 2.0))
    g = Grid(N=4, length=1.0)
    cfg = stepper.StepConfig(tau=1e-3)
    st = stepper.initial_state(p, g, rng.uniform(0.3, 1.5, (4, 3)),
                               rng.uniform(0.7, 1.6, 4))
    W = st.w + 0.02 * rng.standard_normal(st.w.shape)
    trial = stepper.TrajectoryState(w=W, rho_total=st.rho_total)
    D = stepper.jacobian(p, g, cfg, trial, prev=st).to_dense()
    R0 = stepper.residual(p, g, cfg, st, W)
    Dref = np.zeros_like(D)
    for k in range(4):
        for f in range(3):
            d = 1e-7 * (1 + abs(W[k, f]))
            Wp = W.copy()
            Wp[k, f] += d
            Dref[:, k * 3 + f] = (stepper.residual(p, g, cfg, st, Wp)
                                  - R0).ravel() / d
    jac_err = float(np.abs(D - Dref).max() / np.abs(Dref).max())

    pu = random_params(rng, n=3, m_range=(1.0, 2.0))
    gu = Grid(N=12, length=1.0)
    stu = stepper.initial_state(pu, gu, np.tile([0.5, 0.7, 0.9], (12, 1)),
                                np.full(12, 1.2))
    new, _ = stepper.step(pu, gu, cfg, stu)
    fixed = float(np.abs(new.w - stu.w).max())
    resid = float(np.abs(stepper.residual(pu, gu, cfg, stu, new.w)).max())
    ok = jac_err <= 1e-5 and fixed == 0.0 and resid <= cfg.newton_tol
    _report(9, ok, f"banded-vs-dense Jacobian {jac_err:.2e}, uniform fixed point "
                   f"moved {fixed:.1e}, residual {resid:.1e}")
