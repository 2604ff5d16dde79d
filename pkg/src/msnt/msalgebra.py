"""Singular friction-matrix algebra at a point.

The species velocities solve a constrained linear system whose matrix M has
kernel span{sqrt(rho)}; it is inverted on the complement subspace
L = {y : sqrt(rho).y = 0} through the Bott-Duffin inverse

    M_BD = P_L (M P_L + P_Lperp)^{-1}.

From M_BD the Onsager coefficients follow:

    A_ij = M_BD_ij sqrt(rho_i rho_j)           (rows/columns sum to zero)
    B_i  = theta sum_j A_ij / m_j              (sum_i B_i = 0)
    a    = theta^2 (kappa + sum_ij A_ij/(m_i m_j))

and the mass/energy fluxes are linear combinations of entropy-variable
gradients with the positive-semidefinite block matrix Q = [[A, B], [B^T, a]].
Every function is pure; per-point bundles are independent, so calls are safe
from any number of threads.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMSMatrixError

# Relative pivot threshold below which the constrained solve is reported
# singular (signals rho_i ~ 0 degeneracy).
_PIVOT_RTOL = 1e-14


def build_M(params, rho):
    """Friction matrix: M_ii = sum_{k != i} b_ik rho_k, M_ij = -b_ij sqrt(rho_i rho_j).

    Symmetric, positive semidefinite, with M sqrt(rho) = 0 by construction.
    """
    rho = np.asarray(rho, dtype=float)
    sq = np.sqrt(rho)
    bz = params.b.copy()
    np.fill_diagonal(bz, 0.0)
    M = -bz * np.outer(sq, sq)
    np.fill_diagonal(M, bz @ rho)
    return M


def projections(rho):
    """Orthogonal projections (P_L, P_Lperp) onto L = {y : sqrt(rho).y = 0} and L^perp."""
    rho = np.asarray(rho, dtype=float)
    sq = np.sqrt(rho)
    Pperp = np.outer(sq, sq) / rho.sum()
    return np.eye(len(rho)) - Pperp, Pperp


def bott_duffin(M, P_L, P_Lperp):
    """Constrained inverse M_BD = P_L (M P_L + P_Lperp)^{-1} via dense LU.

    Raises SingularMSMatrixError when an LU pivot falls below
    1e-14 * max|M P_L + P_Lperp| (degenerate density vector).
    """
    K = M @ P_L + P_Lperp
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < _PIVOT_RTOL * np.abs(K).max():
        raise SingularMSMatrixError(
            f"constrained friction solve is singular (pivot {pivots.min():.3e})")
    return P_L @ scipy.linalg.lu_solve((lu, piv), np.eye(len(M)), check_finite=False)


@dataclass
class MSLocal:
    """Per-point algebra bundle feeding flux assembly."""

    M: np.ndarray
    P_L: np.ndarray
    P_Lperp: np.ndarray
    M_BD: np.ndarray
    A: np.ndarray
    B: np.ndarray
    a: float


def ms_local(params, rho, theta):
    """Assemble the full MSLocal bundle at a state."""
    rho = np.asarray(rho, dtype=float)
    M = build_M(params, rho)
    P_L, P_Lperp = projections(rho)
    M_BD = bott_duffin(M, P_L, P_Lperp)
    A, B, a = onsager(params, rho, theta, M_BD=M_BD)
    return MSLocal(M=M, P_L=P_L, P_Lperp=P_Lperp, M_BD=M_BD, A=A, B=B, a=a)


def onsager(params, rho, theta, M_BD=None):
    """Onsager coefficients (A, B, a) at a state."""
    rho = np.asarray(rho, dtype=float)
    if M_BD is None:
        M = build_M(params, rho)
        P_L, P_Lperp = projections(rho)
        M_BD = bott_duffin(M, P_L, P_Lperp)
    sq = np.sqrt(rho)
    A = M_BD * np.outer(sq, sq)
    B = theta * (A @ (1.0 / params.m))
    a = theta**2 * (float(params.kappa(theta)) + (1.0 / params.m) @ A @ (1.0 / params.m))
    return A, B, float(a)


def onsager_matrix(params, rho, theta):
    """Full (n+1) x (n+1) block matrix Q = [[A, B], [B^T, a]]."""
    A, B, a = onsager(params, rho, theta)
    n = params.n
    Q = np.empty((n + 1, n + 1))
    Q[:n, :n] = A
    Q[:n, n] = B
    Q[n, :n] = B
    Q[n, n] = a
    return Q


def velocities(params, rho, theta, d):
    """Species velocities from driving forces: sqrt(rho_i) u_i = -sum_j M_BD_ij d_j/(theta sqrt(rho_j)).

    The barycentric constraint sum_i rho_i u_i = 0 holds automatically because
    the range of M_BD lies in L.  Any component of the scaled force outside L
    is projected away rather than rejected; see pressure_constraint_residual.
    """
    rho = np.asarray(rho, dtype=float)
    sq = np.sqrt(rho)
    M = build_M(params, rho)
    P_L, P_Lperp = projections(rho)
    M_BD = bott_duffin(M, P_L, P_Lperp)
    return -(M_BD @ (np.asarray(d, dtype=float) / (theta * sq))) / sq


def pressure_constraint_residual(rho, theta, d):
    """|P_Lperp y| with y_j = d_j/(theta sqrt(rho_j)).

    Zero exactly when the driving forces sum to zero (uniform total pressure);
    discretization error breaks that mildly, and the residual quantifies by
    how much.
    """
    rho = np.asarray(rho, dtype=float)
    sq = np.sqrt(rho)
    y = np.asarray(d, dtype=float) / (theta * sq)
    return float(abs(sq @ y) / np.sqrt(rho.sum()))


def flux_mass(params, rho, theta, grad_q, grad_w, check=True, check_tol=1e-10):
    """Diffusion fluxes J_i from gradients of (q_1..q_n) and w = log theta.

    Evaluates J_i = -sum_j A_ij grad q_j - (B_i/theta) grad w and, when
    ``check`` is set, verifies the two equivalent formulations

        J_i = -sum_j A_ij grad(q_j + w/m_j)
        J_i = -sqrt(rho_i) sum_j M_BD_ij d_j / (theta sqrt(rho_j)),
              d_j = rho_j theta (grad q_j + (c_w + 1/m_j) grad w)

    agree within ``check_tol`` (scaled by the flux magnitude).
    """
    rho = np.asarray(rho, dtype=float)
    grad_q = np.asarray(grad_q, dtype=float)
    loc = ms_local(params, rho, theta)
    J = -(loc.A @ grad_q) - (loc.B / theta) * grad_w
    if check:
        invm = 1.0 / params.m
        J_coro = -(loc.A @ (grad_q + grad_w * invm))
        d = rho * theta * (grad_q + (params.c_w + invm) * grad_w)
        u = -(loc.M_BD @ (d / (theta * np.sqrt(rho)))) / np.sqrt(rho)
        J_direct = rho * u
        scale = max(np.abs(J).max(), 1.0)
        err = max(np.abs(J - J_coro).max(), np.abs(J - J_direct).max())
        if err > check_tol * scale:
            raise SingularMSMatrixError(
                f"flux formulations disagree by {err:.3e} (conditioning problem)")
    return J


def flux_energy(params, rho, theta, grad_theta, u, grad_q=None, check=True,
                check_tol=1e-10):
    """Energy flux J_e = -kappa grad theta + theta sum_i rho_i u_i / m_i.

    With ``grad_q`` supplied (and grad w = grad theta / theta), the equivalent
    Onsager form

        J_e = -kappa theta grad w - sum_j B_j grad q_j - theta sum_ij A_ij/(m_i m_j) grad w

    is cross-checked within ``check_tol``.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    kappa = float(params.kappa(theta))
    Je = -kappa * grad_theta + theta * np.sum(rho * u / params.m)
    if check and grad_q is not None:
        grad_w = grad_theta / theta
        A, B, _ = onsager(params, rho, theta)
        S = (1.0 / params.m) @ A @ (1.0 / params.m)
        Je_onsager = -kappa * theta * grad_w - B @ np.asarray(grad_q, dtype=float) \
            - theta * S * grad_w
        scale = max(abs(Je), abs(Je_onsager), 1.0)
        if abs(Je - Je_onsager) > check_tol * scale:
            raise SingularMSMatrixError(
                f"energy flux formulations disagree by {abs(Je - Je_onsager):.3e}")
    return float(Je)


def friction_dissipation_density(params, rho, u):
    """(1/2) sum_ij b_ij rho_i rho_j |u_i - u_j|^2 at a point (always >= 0)."""
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    du = u[:, None] - u[None, :]
    return 0.5 * float(np.sum(params.b * np.outer(rho, rho) * du * du))
