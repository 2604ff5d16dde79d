"""Implicit Euler time stepping in entropy variables.

The unknowns per cell are (w_1..w_{n-1}, w = log theta); densities and
temperature recovered from them are positive by construction, so the scheme
needs no clipping or constrained solves.  The total density field is frozen
at its initial value (summing the mass balances with the barycentric
constraint gives a vanishing time derivative), which also pins the recovered
species densities to it exactly.

Each step solves the nonlinear residual with a damped Newton iteration on a
finite-difference Jacobian assembled in banded form (the spatial stencil
couples nearest-neighbor cells only, or next-nearest with the optional
higher-order regularization).  Failed solves retry with halved time steps,
composing substeps to advance exactly tau.

Determinism contract: residual and Jacobian assembly use fixed summation
order and no internal parallelism, so repeated runs are bitwise identical.
Distinct trajectories share no state and may run concurrently.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import StateRecoveryError, StepFailed, ValidationError
from .grid1d import apply_boundary, face_average

# Relative density floor applied once to initial data (admissible initial
# states may touch zero; entropy variables need strict positivity).
DENSITY_FLOOR = 1e-12

_FD_STEP = 1e-7
_DAMPING_FLOOR = 1e-4


@dataclass(frozen=True)
class StepConfig:
    """Time-step and nonlinear-solver controls."""

    tau: float
    newton_tol: float = 1e-11
    newton_max: int = 30
    damping: float = 0.5
    max_halvings: int = 8
    face_averaging: str = "arithmetic"

    def __post_init__(self):
        if self.tau <= 0:
            raise ValidationError("time step tau must be positive")
        if self.newton_tol < 1e-13:
            raise ValidationError("newton_tol must be at least 1e-13")
        if not 0 < self.damping < 1:
            raise ValidationError("damping factor must lie in (0, 1)")
        if self.newton_max < 1 or self.max_halvings < 0:
            raise ValidationError("iteration limits must be positive")
        if self.face_averaging not in ("arithmetic", "harmonic"):
            raise ValidationError("face_averaging must be arithmetic or harmonic")

    @property
    def entropy_slack(self):
        """Tolerance for per-step entropy-inequality checks."""
        return 10.0 * self.newton_tol


@dataclass
class TrajectoryState:
    """Entropy-variable fields plus the frozen total-density field."""

    w: np.ndarray          # (N, n); last column is log theta
    rho_total: np.ndarray  # (N,), time-invariant
    time: float = 0.0

    def recover(self, params):
        """Cell states (rho (N, n), theta (N,)) represented by the fields."""
        return kernels.recover_states(params.m, self.rho_total, self.w)


def initial_state(params, grid, rho_fields, theta_field):
    """Build the trajectory state from initial density/temperature fields.

    ``rho_fields`` is (N, n).  Densities are floored at DENSITY_FLOOR times
    the local total before the first entropy-variable conversion; afterwards
    positivity is automatic.
    """
    rho = np.array(rho_fields, dtype=float)
    theta = np.asarray(theta_field, dtype=float)
    if rho.shape != (grid.N, params.n):
        raise ValidationError(f"initial densities must be shaped ({grid.N}, {params.n})")
    if theta.shape != (grid.N,):
        raise ValidationError(f"initial temperature must have length {grid.N}")
    if np.any(rho < 0):
        raise ValidationError("initial densities must be nonnegative", assumption="(A2)")
    total = rho.sum(axis=1)
    if np.any(total <= 0):
        raise ValidationError("initial total density must be positive everywhere",
                              assumption="(A2)")
    if theta.min() <= 0:
        raise ValidationError("initial temperature must be positive everywhere",
                              assumption="(A2)")
    rho = np.maximum(rho, DENSITY_FLOOR * total[:, None])
    total = rho.sum(axis=1)
    logs = np.log(rho / params.m) / params.m
    W = np.empty((grid.N, params.n))
    W[:, : params.n - 1] = logs[:, :-1] - logs[:, -1:]
    W[:, params.n - 1] = np.log(theta)
    return TrajectoryState(w=W, rho_total=total, time=0.0)


def _laplacian(f, dx):
    g = np.zeros(len(f) + 1)
    g[1:-1] = np.diff(f) / dx
    return np.diff(g) / dx


def residual(params, grid, cfg, prev, trial_w, prev_fields=None, tau=None):
    """Nonlinear residual of one implicit step, per cell and unknown (N, n).

    Rows 0..n-2 are the species balances (rho_i(w) - rho_i(prev))/tau + div J_i;
    the last row is the energy balance with the Robin boundary term.  With
    epsilon > 0 the discrete lower-order regularization terms are added (the
    fourth-order parts as a repeated second difference); that mode is
    experimental and intentionally breaks the conservation properties.
    """
    n = params.n
    dx = grid.dx
    tau = cfg.tau if tau is None else tau
    if prev_fields is None:
        prev_fields = prev.recover(params)
    prev_rho, prev_theta = prev_fields
    rho, theta = kernels.recover_states(params.m, prev.rho_total, trial_w)

    R = np.empty((grid.N, n))
    R[:, : n - 1] = (rho[:, :-1] - prev_rho[:, :-1]) / tau
    R[:, n - 1] = params.c_w * prev.rho_total * (theta - prev_theta) / tau

    if grid.N > 1:
        rho_f = face_average(rho[:-1], rho[1:], cfg.face_averaging)
        gw = np.diff(trial_w[:, : n - 1], axis=0) / dx
        gwlog = np.diff(trial_w[:, n - 1]) / dx
        Jm, Je = kernels.face_fluxes(params.m, params.b, params.kappa0,
                                     params.kappa2, rho_f, theta[:-1], theta[1:],
                                     gw, gwlog)
        R[0, : n - 1] += Jm[0, : n - 1] / dx
        R[1:-1, : n - 1] += np.diff(Jm[:, : n - 1], axis=0) / dx
        R[-1, : n - 1] -= Jm[-1, : n - 1] / dx
        R[0, n - 1] += Je[0] / dx
        R[1:-1, n - 1] += np.diff(Je) / dx
        R[-1, n - 1] -= Je[-1] / dx
    je_left, je_right = apply_boundary(params, theta[0], theta[-1])
    R[0, n - 1] -= je_left / dx
    R[-1, n - 1] += je_right / dx

    if params.epsilon > 0:
        eps = params.epsilon
        for i in range(n - 1):
            wi = trial_w[:, i]
            R[:, i] += eps * (_laplacian(_laplacian(wi, dx), dx) + wi)
        w = trial_w[:, n - 1]
        R[:, n - 1] += eps * (params.theta0 + theta) * (w - params.w0)
        R[:, n - 1] += eps * _laplacian(theta * _laplacian(w, dx), dx)
        gwf = np.zeros(grid.N + 1)
        gwf[1:-1] = np.diff(w) / dx
        thf = np.ones(grid.N + 1)
        if grid.N > 1:
            thf[1:-1] = kernels.theta_energy_mean(theta[:-1], theta[1:])
        R[:, n - 1] -= eps * np.diff(thf * gwf**3) / dx
    return R


class BandedJacobian:
    """Forward-difference Jacobian stored in LAPACK band form.

    Column blocks are assembled cell-by-cell with a coloring that exploits the
    short spatial stencil, so a full Jacobian costs (2 sw + 1) n residual
    evaluations instead of N n.
    """

    def __init__(self, ab, bandwidth, N, n):
        self.ab = ab
        self.bandwidth = bandwidth
        self.N = N
        self.n = n

    def solve(self, rhs):
        return scipy.linalg.solve_banded((self.bandwidth, self.bandwidth),
                                         self.ab, rhs, check_finite=False)

    def to_dense(self):
        size = self.N * self.n
        B = self.bandwidth
        A = np.zeros((size, size))
        for i in range(size):
            lo = max(0, i - B)
            hi = min(size, i + B + 1)
            for j in range(lo, hi):
                A[i, j] = self.ab[B + i - j, j]
        return A

    def matvec(self, v):
        return self.to_dense() @ np.asarray(v, dtype=float).ravel()


def jacobian(params, grid, cfg, trial, prev=None, base_residual=None, tau=None):
    """Banded forward-difference Jacobian of the residual at ``trial``.

    ``trial`` is a TrajectoryState (the total-density field determines the
    state recovery).  The previous state only shifts the residual by a
    constant, so any reference works; by default the trial itself is used.
    """
    if prev is None:
        prev = trial
    ab, B, _ = _fd_jacobian(params, grid, cfg, prev, trial.w,
                            base_residual=base_residual, tau=tau)
    return BandedJacobian(ab, B, grid.N, params.n)


def _fd_jacobian(params, grid, cfg, prev, W, base_residual=None, tau=None,
                 prev_fields=None):
    N, n = W.shape
    sw = 1 if params.epsilon == 0 else 2
    ncolors = 2 * sw + 1
    B = sw * n + (n - 1)
    ab = np.zeros((2 * B + 1, N * n))
    R0 = base_residual
    if R0 is None:
        R0 = residual(params, grid, cfg, prev, W, prev_fields=prev_fields, tau=tau)
    for c in range(min(ncolors, N)):
        ks = np.arange(c, N, ncolors)
        for f in range(n):
            delta = _FD_STEP * (1.0 + np.abs(W[ks, f]))
            Wp = W.copy()
            Wp[ks, f] += delta
            R1 = residual(params, grid, cfg, prev, Wp, prev_fields=prev_fields, tau=tau)
            dR = R1 - R0
            for off in range(-sw, sw + 1):
                kk = ks + off
                valid = (kk >= 0) & (kk < N)
                if not valid.any():
                    continue
                cols = ks[valid] * n + f
                for fp in range(n):
                    ab[B + off * n + fp - f, cols] = dR[kk[valid], fp] / delta[valid]
    return ab, B, R0


class _SubstepFailure(Exception):
    def __init__(self, message, residual_norm):
        super().__init__(message)
        self.residual_norm = residual_norm


def _safe_residual(params, grid, cfg, prev, W, prev_fields, tau):
    try:
        R = residual(params, grid, cfg, prev, W, prev_fields=prev_fields, tau=tau)
    except (StateRecoveryError, np.linalg.LinAlgError, ValueError):
        return None, np.inf
    norm = float(np.abs(R).max()) if np.all(np.isfinite(R)) else np.inf
    return R, norm


def _newton_advance(params, grid, cfg, prev, prev_fields, tau):
    """One implicit substep of size tau; returns the new entropy fields."""
    W = prev.w.copy()
    R, norm = _safe_residual(params, grid, cfg, prev, W, prev_fields, tau)
    if norm <= cfg.newton_tol:
        return W
    for _ in range(cfg.newton_max):
        if not np.isfinite(norm):
            raise _SubstepFailure("residual not finite", norm)
        try:
            ab, B, _ = _fd_jacobian(params, grid, cfg, prev, W,
                                    base_residual=R, tau=tau,
                                    prev_fields=prev_fields)
            delta = scipy.linalg.solve_banded((B, B), ab, -R.ravel(),
                                              check_finite=False)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError,
                StateRecoveryError) as exc:
            raise _SubstepFailure(f"Jacobian assembly/solve failed: {exc}", norm)
        if not np.all(np.isfinite(delta)):
            raise _SubstepFailure("singular Jacobian (non-finite update)", norm)
        step_dir = delta.reshape(W.shape)
        alpha = 1.0
        accepted = False
        while alpha >= _DAMPING_FLOOR:
            W_try = W + alpha * step_dir
            R_try, norm_try = _safe_residual(params, grid, cfg, prev, W_try,
                                             prev_fields, tau)
            if norm_try < norm:
                W, R, norm = W_try, R_try, norm_try
                accepted = True
                break
            alpha *= cfg.damping
        if not accepted:
            raise _SubstepFailure("line search stalled", norm)
        if norm <= cfg.newton_tol:
            return W
    raise _SubstepFailure("Newton iteration limit reached", norm)


def step(params, grid, cfg, prev, with_diagnostics=True):
    """Advance one time step tau, retrying with halved substeps on failure.

    Returns (state, record); ``record`` is None when diagnostics are disabled.
    Recorded dissipation rates are time-averaged over the substeps actually
    taken (usually one).
    """
    from . import diagnostics

    last = None
    for halvings in range(cfg.max_halvings + 1):
        nsub = 2 ** halvings
        dt = cfg.tau / nsub
        W = prev.w
        fields = prev.recover(params)
        fourier = friction = 0.0
        try:
            for s in range(nsub):
                state_k = TrajectoryState(w=W, rho_total=prev.rho_total,
                                          time=prev.time + s * dt)
                W = _newton_advance(params, grid, cfg, state_k, fields, dt)
                fields = kernels.recover_states(params.m, prev.rho_total, W)
                if with_diagnostics:
                    f4, fr = diagnostics.dissipation_rates(
                        params, grid, W, fields[0], fields[1], cfg.face_averaging)
                    fourier += dt * f4
                    friction += dt * fr
        except _SubstepFailure as exc:
            last = exc
            continue
        new = TrajectoryState(w=W, rho_total=prev.rho_total, time=prev.time + cfg.tau)
        record = None
        if with_diagnostics:
            record = diagnostics.compute_record(
                params, grid, new, fourier_dissipation=fourier / cfg.tau,
                friction_dissipation=friction / cfg.tau,
                face_averaging=cfg.face_averaging, fields=fields)
        return new, record
    raise StepFailed(
        f"step failed after {cfg.max_halvings} halvings: {last}",
        time=prev.time, residual_norm=getattr(last, "residual_norm", None),
        halvings=cfg.max_halvings)


def iterate(params, grid, cfg, state, n_steps, with_diagnostics=True):
    """Generator of (state, record) pairs over ``n_steps`` accepted steps."""
    for _ in range(n_steps):
        state, record = step(params, grid, cfg, state, with_diagnostics)
        yield state, record


def simulate(params, grid, cfg, state, n_steps, collect_states=False):
    """Run ``n_steps`` steps; returns (final_state, records[, states])."""
    records = []
    states = [state] if collect_states else None
    for new_state, record in iterate(params, grid, cfg, state, n_steps):
        records.append(record)
        if collect_states:
            states.append(new_state)
        state = new_state
    if collect_states:
        return state, records, states
    return state, records
