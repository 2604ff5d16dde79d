"""Entropy, dissipation, and stability diagnostics.

Everything integrates with the midpoint (cell-value) rule so that the audited
quantities are exactly the ones the implicit scheme balances: the per-step
inequality

    H(t_k) + tau * [ integral kappa |grad log theta|^2
                     + (1/2) integral sum_ij b_ij rho_i rho_j |u_i - u_j|^2 ]
        <= H(t_{k-1}) + O(newton_tol)

holds structurally (not just to discretization order) because the stepper
evaluates its energy flux at the compatible face temperature.  All functions
are read-only over trajectory snapshots and safe to call concurrently.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import constitutive, kernels, stepper
from .errors import ValidationError
from .grid1d import Grid, face_average, prolong, restrict


@dataclass
class DiagnosticsRecord:
    """Per-step audit of one trajectory state.

    Dissipation fields are rates (already the time-average over any substeps
    taken inside a step).  ``rho_theta2`` is the current integral rho theta^2;
    run orchestration tracks its running supremum.  ``relative_entropy`` stays
    None unless a reference trajectory was supplied.
    """

    time: float
    entropy: float
    energy: float
    masses: np.ndarray
    fourier_dissipation: float
    friction_dissipation: float
    max_grad_p: float
    rho_theta2: float
    relative_entropy: float = None


def total_entropy(params, grid, state, fields=None):
    """H = integral of h over the grid (midpoint quadrature)."""
    rho, theta = fields if fields is not None else state.recover(params)
    return float(np.sum(constitutive.entropy_density(params, rho, theta)) * grid.dx)


def total_energy(params, grid, state, fields=None):
    rho, theta = fields if fields is not None else state.recover(params)
    return float(np.sum(constitutive.internal_energy(params, rho, theta)) * grid.dx)


def species_masses(params, grid, state, fields=None):
    rho, _ = fields if fields is not None else state.recover(params)
    return rho.sum(axis=0) * grid.dx


def relative_entropy(params, grid, state, ref_state, fields=None, ref_fields=None):
    """Bregman divergence of the entropy between two states on one grid.

    integral [ sum_i (1/m_i)(rho_i log(rho_i/ref_i) - (rho_i - ref_i))
               + c_w rho (-log(theta/ref) + (theta - ref)/ref) ] dx

    Nonnegative, and zero exactly when the states coincide.  The temperature
    part is the Bregman form of h with respect to the internal energy, hence
    the 1/ref factor on the linear term.
    """
    rho, theta = fields if fields is not None else state.recover(params)
    rbar, tbar = ref_fields if ref_fields is not None else ref_state.recover(params)
    if rho.shape != rbar.shape:
        raise ValidationError("relative entropy requires states on the same grid")
    dens = np.sum((rho * np.log(rho / rbar) - (rho - rbar)) / params.m, axis=1)
    s = theta / tbar
    temp = params.c_w * rho.sum(axis=1) * (-np.log(s) + (theta - tbar) / tbar)
    return float(np.sum(dens + temp) * grid.dx)


def relative_entropy_quadratic_bound(params, rho, theta, rbar, tbar):
    """Constant C with  relative entropy >= C (sum_i ||rho_i-ref_i||^2 + ||theta-ref||^2).

    From the elementary bounds g(s) = s log s - s + 1 >= (s-1)^2 / (2 max(1, s))
    and f(s) = -log s + s - 1 >= (s-1)^2 / (2 max(1, s)^2):
    C = min over cells/species of  1/(2 m_i max(rho_i, ref_i))  and
        c_w rho / (2 max(theta, ref)^2).
    """
    c_dens = 1.0 / (2.0 * params.m * np.maximum(rho, rbar))
    c_temp = params.c_w * rho.sum(axis=1) / (2.0 * np.maximum(theta, tbar) ** 2)
    return float(min(c_dens.min(), c_temp.min()))


def dissipation_rates(params, grid, W, rho, theta, face_averaging="arithmetic"):
    """(fourier, friction) dissipation rates of a state.

    fourier  = sum over interior faces of kappa(theta_h) |grad log theta|^2 dx
    friction = sum over interior faces of
               (1/2) sum_ij b_ij rho_i rho_j |u_i - u_j|^2 dx

    with face velocities rebuilt from entropy-variable gradients at the
    face-averaged state.  Both are sums of nonnegative face terms.
    """
    if grid.N < 2:
        return 0.0, 0.0
    dx = grid.dx
    rho_f = face_average(rho[:-1], rho[1:], face_averaging)
    gwlog = np.diff(W[:, -1]) / dx
    th = kernels.theta_energy_mean(theta[:-1], theta[1:])
    fourier = float(np.sum(params.kappa(th) * gwlog**2) * dx)
    q = constitutive.entropy_variables_q(params, rho, theta)
    gq = np.diff(q, axis=0) / dx
    _, friction_faces = kernels.face_velocity_data(params.m, params.b, params.c_w,
                                                   rho_f, gq, gwlog)
    return fourier, float(friction_faces.sum() * dx)


def max_pressure_gradient(params, grid, rho, theta):
    """max over faces of |grad p| (zero-gradient boundary faces excluded)."""
    if grid.N < 2:
        return 0.0
    p = constitutive.total_pressure(params, rho, theta)
    return float(np.abs(np.diff(p)).max() / grid.dx)


def compute_record(params, grid, state, fourier_dissipation=None,
                   friction_dissipation=None, face_averaging="arithmetic",
                   fields=None, reference=None):
    """Assemble the full audit record of one state."""
    rho, theta = fields if fields is not None else state.recover(params)
    if fourier_dissipation is None or friction_dissipation is None:
        fourier_dissipation, friction_dissipation = dissipation_rates(
            params, grid, state.w, rho, theta, face_averaging)
    rel = None
    if reference is not None:
        rel = relative_entropy(params, grid, state, reference)
    return DiagnosticsRecord(
        time=state.time,
        entropy=total_entropy(params, grid, state, fields=(rho, theta)),
        energy=total_energy(params, grid, state, fields=(rho, theta)),
        masses=rho.sum(axis=0) * grid.dx,
        fourier_dissipation=fourier_dissipation,
        friction_dissipation=friction_dissipation,
        max_grad_p=max_pressure_gradient(params, grid, rho, theta),
        rho_theta2=float(np.sum(rho.sum(axis=1) * theta**2) * grid.dx),
        relative_entropy=rel,
    )


def entropy_margin(prev_record, next_record, tau):
    """Raw per-step entropy balance H_prev - H_next - tau * D_next.

    Nonnegative up to Newton-residual noise for the plain scheme with
    insulated walls.
    """
    D = next_record.fourier_dissipation + next_record.friction_dissipation
    return prev_record.entropy - next_record.entropy - tau * D


def entropy_inequality_check(prev_record, next_record, tau, slack):
    """Check H_next + tau D <= H_prev + slack between consecutive accepted steps.

    Returns (passed, margin) with margin = slack + raw balance, so a uniform
    stationary pair yields margin == slack.  The failure result carries both
    sides through the records for logging.
    """
    margin = slack + entropy_margin(prev_record, next_record, tau)
    return margin >= 0.0, margin


def equilibrium_state(params, grid, state, fields=None):
    """Long-time equilibrium fixed by the conserved masses and energy.

    Requires a spatially uniform total-density field (otherwise the closed-box
    equilibrium is not a uniform state and is out of scope here).
    """
    rho, theta = fields if fields is not None else state.recover(params)
    total = state.rho_total
    mean_total = total.mean()
    if np.abs(total - mean_total).max() > 1e-10 * mean_total:
        raise ValidationError("equilibrium_state needs a uniform total density field")
    rho_eq = rho.mean(axis=0)
    theta_eq = float(np.sum(rho.sum(axis=1) * theta) / total.sum())
    logs = np.log(rho_eq / params.m) / params.m
    W = np.empty((grid.N, params.n))
    W[:, : params.n - 1] = logs[:-1] - logs[-1]
    W[:, params.n - 1] = np.log(theta_eq)
    return stepper.TrajectoryState(w=W, rho_total=total.copy(), time=state.time)


@dataclass
class WeakStrongReport:
    """Outcome of the weak-strong stability experiment.

    The "strong solution" is proxied by a refined numerical run (an
    experimental stand-in, not a certified strong solution); since the
    stability estimate presumes bounded velocities and temperature gradients
    for that solution, which no numerical proxy can verify, their observed
    sup-norms are reported instead.
    """

    times: np.ndarray
    relative_entropy: np.ndarray
    final_relative_entropy: float
    fitted_rate: float
    sup_velocity: float
    sup_grad_log_theta: float
    coarse_cells: int
    fine_cells: int
    tau: float
    refined_final_relative_entropy: float = None
    refinement_ratio: float = None


def _run_pair(params, grid_c, cfg, rho0_c, theta0_c, n_steps, factor,
              weak_initial=None):
    """Coarse run vs refined proxy from the same (piecewise-constant) data.

    Returns (times, re_series, sup|u|, sup|grad log theta|) where the series
    compares the coarse state against the cell-averaged restriction of the
    proxy at matching times.  ``weak_initial`` optionally replaces the coarse
    run's initial data (the proxy keeps the unperturbed data), which makes the
    initial relative entropy positive.
    """
    grid_f = Grid(N=grid_c.N * factor, length=grid_c.length)
    cfg_f = dataclasses.replace(cfg, tau=cfg.tau / factor)
    rho_w, theta_w = weak_initial if weak_initial is not None else (rho0_c, theta0_c)
    coarse = stepper.initial_state(params, grid_c, rho_w, theta_w)
    fine = stepper.initial_state(params, grid_f,
                                 prolong(rho0_c, factor), prolong(theta0_c, factor))
    times = [0.0]
    res = [relative_entropy_restricted(params, grid_c, coarse, fine, factor)]
    sup_u = 0.0
    sup_glt = 0.0
    for k in range(n_steps):
        coarse, _ = stepper.step(params, grid_c, cfg, coarse, with_diagnostics=False)
        for _ in range(factor):
            fine, _ = stepper.step(params, grid_f, cfg_f, fine, with_diagnostics=False)
        times.append(coarse.time)
        res.append(relative_entropy_restricted(params, grid_c, coarse, fine, factor))
        rho_f, theta_f = fine.recover(params)
        if grid_f.N > 1:
            gq = np.diff(constitutive.entropy_variables_q(params, rho_f, theta_f),
                         axis=0) / grid_f.dx
            gwl = np.diff(np.log(theta_f)) / grid_f.dx
            u, _ = kernels.face_velocity_data(
                params.m, params.b, params.c_w,
                face_average(rho_f[:-1], rho_f[1:], cfg.face_averaging), gq, gwl)
            if u.size:
                sup_u = max(sup_u, float(np.abs(u).max()))
            if gwl.size:
                sup_glt = max(sup_glt, float(np.abs(gwl).max()))
    return np.array(times), np.array(res), sup_u, sup_glt


def relative_entropy_restricted(params, grid_c, coarse_state, fine_state, factor):
    """Relative entropy of a coarse state against a cell-averaged fine state."""
    rho_c, theta_c = coarse_state.recover(params)
    rho_f, theta_f = fine_state.recover(params)
    rbar = restrict(rho_f, factor)
    tbar = restrict(theta_f, factor)
    dens = np.sum((rho_c * np.log(rho_c / rbar) - (rho_c - rbar)) / params.m, axis=1)
    s = theta_c / tbar
    temp = params.c_w * rho_c.sum(axis=1) * (-np.log(s) + (theta_c - tbar) / tbar)
    return float(np.sum(dens + temp) * grid_c.dx)


def fit_exponential_rate(times, values, window=0.1):
    """Least-squares slope of log(values) over the first ``window`` fraction
    of the entries with values > 1e-30; nan when underdetermined."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values > 1e-30
    if mask.sum() < 2:
        return float("nan")
    t = times[mask]
    v = np.log(values[mask])
    k = max(2, int(np.ceil(window * len(t))))
    t, v = t[:k], v[:k]
    A = np.stack([t, np.ones_like(t)], axis=1)
    slope, _ = np.linalg.lstsq(A, v, rcond=None)[0]
    return float(slope)


def weak_strong_experiment(params, grid_coarse, grid_fine, cfg, rho0, theta0,
                           n_steps, refinement_check=True, weak_initial=None):
    """Relative-entropy convergence experiment against a refined proxy.

    Runs the coarse trajectory (grid_coarse, tau) against a proxy on
    grid_fine with tau scaled down by the refinement factor, both from the
    same piecewise-constant initial data; reports the relative entropy over
    time and its fitted exponential rate.  With ``refinement_check`` the whole
    comparison is repeated one level finer; first-order convergence shows as
    ``refinement_ratio`` (coarse final over refined final) >= 1.5.
    ``weak_initial`` perturbs only the coarse run (Gronwall monitoring).
    """
    if grid_fine.N % grid_coarse.N or grid_fine.N == grid_coarse.N:
        raise ValidationError("fine grid must be a strict multiple of the coarse grid")
    factor = grid_fine.N // grid_coarse.N
    times, res, sup_u, sup_glt = _run_pair(params, grid_coarse, cfg,
                                           rho0, theta0, n_steps, factor,
                                           weak_initial=weak_initial)
    report = WeakStrongReport(
        times=times, relative_entropy=res, final_relative_entropy=float(res[-1]),
        fitted_rate=fit_exponential_rate(times, res),
        sup_velocity=sup_u, sup_grad_log_theta=sup_glt,
        coarse_cells=grid_coarse.N, fine_cells=grid_fine.N, tau=cfg.tau)
    if refinement_check:
        cfg2 = dataclasses.replace(cfg, tau=cfg.tau / 2.0)
        grid2 = Grid(N=2 * grid_coarse.N, length=grid_coarse.length)
        _, res2, _, _ = _run_pair(params, grid2, cfg2, prolong(rho0, 2),
                                  prolong(theta0, 2), 2 * n_steps, factor)
        report.refined_final_relative_entropy = float(res2[-1])
        if res2[-1] > 0:
            report.refinement_ratio = float(res[-1] / res2[-1])
    return report
