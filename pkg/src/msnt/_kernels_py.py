"""Pure-numpy batched kernels (fallback backend).

Vectorizes the two hot operations of the implicit solver over all cells and
all interior faces: entropy-variable inversion and flux assembly.  The
compiled backend (_kernels_cy) implements the same contracts; see
msnt.kernels for selection.
"""

import numpy as np

from .errors import StateRecoveryError

_EXP_LIMIT = 700.0
_BISECT_ITERS = 64
_LOG_SPAN = 745.0

BACKEND_NAME = "python"


def recover_states(m, rho_total, W):
    """Batched entropy-variable inversion.

    m          molar masses (n,)
    rho_total  frozen total densities (N,)
    W          entropy-variable fields (N, n); last column is log theta

    Returns (rho (N, n), theta (N,)).  Bisection in log(rho_n) with a fixed
    iteration count; see constitutive.state_from_entropy_vars for the scalar
    variant and the conditioning rationale.
    """
    m = np.asarray(m, dtype=float)
    W = np.asarray(W, dtype=float)
    rho_total = np.asarray(rho_total, dtype=float)
    N, n = W.shape
    wlog = W[:, -1]
    if np.any(np.abs(wlog) > _EXP_LIMIT):
        raise StateRecoveryError("log-temperature overflow in state recovery")
    expo = m[:-1] * W[:, :-1]
    if np.any(expo > _EXP_LIMIT):
        raise StateRecoveryError("overflow in exp(m_i w_i) during state recovery")
    a = m[:-1] * np.exp(expo)                       # (N, n-1)
    p = m[:-1] / m[-1]
    log_mn = np.log(m[-1])
    hi = np.log(rho_total).copy()
    lo = hi - _LOG_SPAN
    with np.errstate(over="ignore"):
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            g = np.exp(mid) + np.sum(a * np.exp(p * (mid[:, None] - log_mn)), axis=1) \
                - rho_total
            above = g > 0.0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
    t = np.exp(0.5 * (lo + hi))
    rho = np.empty((N, n))
    rho[:, -1] = t
    rho[:, :-1] = a * (t[:, None] / m[-1]) ** p
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise StateRecoveryError("non-finite densities in batched state recovery")
    return rho, np.exp(wlog)


def theta_energy_mean(theta_l, theta_r):
    """Face temperature mean compatible with the discrete entropy balance.

    Defined by  theta_h = (log theta_r - log theta_l) / (1/theta_l - 1/theta_r)
    (continuously extended by theta at equal arguments).  With this mean the
    energy flux paired against differences of -1/theta reproduces the face
    dissipation exactly, which is what makes the per-step entropy inequality
    hold to solver tolerance instead of to discretization order.
    """
    theta_l = np.asarray(theta_l, dtype=float)
    theta_r = np.asarray(theta_r, dtype=float)
    x = (theta_r - theta_l) / theta_l
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    ratio = np.where(small, 1.0 - 0.5 * x, np.log1p(safe) / safe)
    return theta_r * ratio


def _face_solve(m, b, rho_f, rhs_list):
    """Apply the Bott-Duffin inverse action x -> P_L (M P_L + P_Lperp)^{-1} x
    to a list of right-hand sides, batched over faces."""
    F, n = rho_f.shape
    sq = np.sqrt(rho_f)                             # (F, n)
    rtot = rho_f.sum(axis=1)                        # (F,)
    bz = np.asarray(b, dtype=float).copy()
    np.fill_diagonal(bz, 0.0)
    M = -bz[None, :, :] * sq[:, :, None] * sq[:, None, :]
    diag = rho_f @ bz.T                             # (F, n)
    M[:, np.arange(n), np.arange(n)] = diag
    Pperp = sq[:, :, None] * sq[:, None, :] / rtot[:, None, None]
    PL = np.eye(n)[None, :, :] - Pperp
    K = M @ PL + Pperp                              # (F, n, n)
    rhs = np.stack(rhs_list, axis=2)                # (F, n, k)
    x = np.linalg.solve(K, rhs)
    # project onto L: x - sq (sq.x)/rtot
    proj = np.einsum("fi,fik->fk", sq, x) / rtot[:, None]
    x = x - sq[:, :, None] * proj[:, None, :]
    return x, sq


def face_fluxes(m, b, kappa0, kappa2, rho_f, theta_l, theta_r, gw, gwlog):
    """Mass and energy fluxes at interior faces.

    rho_f      face-averaged densities (F, n)
    theta_l/r  adjacent cell temperatures (F,)
    gw         face gradients of w_1..w_{n-1} (F, n-1)
    gwlog      face gradients of w = log theta (F,)

    Returns (Jmass (F, n), Je (F,)).  The mass fluxes are
    J_i = -sum_{j<n} A_ij gw_j - (A 1/m)_i gwlog (temperature-free); the
    energy flux carries the compatible face temperature theta_h:
    Je = -theta_h [ (kappa(theta_h) + S) gwlog + sum_{j<n} (A 1/m)_j gw_j ].
    """
    m = np.asarray(m, dtype=float)
    rho_f = np.asarray(rho_f, dtype=float)
    gw = np.asarray(gw, dtype=float)
    gwlog = np.asarray(gwlog, dtype=float)
    F, n = rho_f.shape
    if F == 0:
        return np.zeros((0, n)), np.zeros(0)
    g = np.zeros((F, n))
    g[:, : n - 1] = gw
    invm = np.broadcast_to(1.0 / m, (F, n))
    sqg = np.sqrt(rho_f) * g
    sqinvm = np.sqrt(rho_f) * invm
    x, sq = _face_solve(m, b, rho_f, [sqg, sqinvm])
    Ag = sq * x[:, :, 0]                            # A @ g
    Aim = sq * x[:, :, 1]                           # A @ (1/m)
    Jmass = -(Ag + Aim * gwlog[:, None])
    S = np.einsum("fi,i->f", Aim, 1.0 / m)
    th = theta_energy_mean(theta_l, theta_r)
    kappa = kappa0 + kappa2 * th * th
    Je = -th * ((kappa + S) * gwlog
                + np.einsum("fi,fi->f", Aim[:, : n - 1], gw))
    return Jmass, Je


def face_velocity_data(m, b, c_w, rho_f, gq, gwlog):
    """Species face velocities and friction dissipation density per face.

    gq are the face gradients of the unreduced entropy variables q_1..q_n.
    Returns (u (F, n), friction (F,)) with
    friction = (1/2) sum_ij b_ij rho_i rho_j (u_i - u_j)^2 >= 0.
    """
    m = np.asarray(m, dtype=float)
    rho_f = np.asarray(rho_f, dtype=float)
    gq = np.asarray(gq, dtype=float)
    F, n = rho_f.shape
    if F == 0:
        return np.zeros((0, n)), np.zeros(0)
    # scaled driving force y_j = d_j/(theta sqrt(rho_j)); temperature-free
    y = np.sqrt(rho_f) * (gq + (c_w + 1.0 / m) * np.asarray(gwlog)[:, None])
    x, sq = _face_solve(m, b, rho_f, [y])
    u = -x[:, :, 0] / sq
    du = u[:, :, None] - u[:, None, :]
    rr = rho_f[:, :, None] * rho_f[:, None, :]
    friction = 0.5 * np.einsum("ij,fij->f", np.asarray(b, dtype=float), rr * du * du)
    return u, friction
