"""Thermodynamic closures for an ideal, simple gas mixture.

Everything here is pointwise algebra on (rho_1..rho_n, theta): free energies,
chemical potentials, entropy, internal energy, pressures, driving forces, and
the bijection between the primal state and the relative entropy variables
(w_1..w_{n-1}, w = log theta).  All functions broadcast: ``rho`` may be shaped
(..., n) with ``theta`` shaped (...,), so the same code serves single points
and whole fields.

The mixture is "simple": the partial free energy of species i depends on
(rho_i, theta) only,

    psi_i = theta (rho_i/m_i) (log(rho_i/m_i) - 1) - c_w rho_i theta (log theta - 1),

from which mu_i = d(psi_i)/d(rho_i), the partial pressure p_i = rho_i mu_i - psi_i
(Gibbs-Duhem), the internal energy rho_i e_i = c_w rho_i theta, and the entropy
density all follow.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StateRecoveryError, ValidationError

# Arguments to exp() beyond this are treated as overflow in the inversion.
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class MixtureParams:
    """Physical constants of the mixture and its boundary coupling.

    n         species count (>= 2)
    m         molar masses, length n, all positive
    b         symmetric friction coefficients, b[i, j] > 0 for i != j
              (the diagonal is ignored)
    c_w       heat capacity (> 0)
    kappa0,
    kappa2    heat conductivity law kappa(theta) = kappa0 + kappa2 theta^2,
              both positive, so min(kappa0, kappa2) (1 + theta^2) <= kappa
              <= max(kappa0, kappa2) (1 + theta^2)
    lam       boundary relaxation constant lambda >= 0
    theta0    background temperature (> 0)
    epsilon   strength of the optional higher-order regularization (>= 0;
              0 selects the plain scheme)
    """

    n: int
    m: np.ndarray
    b: np.ndarray
    c_w: float
    kappa0: float
    kappa2: float
    lam: float = 0.0
    theta0: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.n < 2:
            raise ValidationError("need at least two species", assumption="(A1)")
        if self.m.shape != (self.n,) or np.any(self.m <= 0):
            raise ValidationError("molar masses must be positive, length n")
        if self.b.shape != (self.n, self.n):
            raise ValidationError("friction matrix must be n x n", assumption="(A3)")
        off = ~np.eye(self.n, dtype=bool)
        if not np.allclose(self.b, self.b.T, rtol=0.0, atol=1e-14):
            raise ValidationError("friction coefficients must be symmetric",
                                  assumption="(A3)")
        if np.any(self.b[off] <= 0):
            raise ValidationError("friction coefficients b_ij must be positive for i != j",
                                  assumption="(A3)")
        if self.c_w <= 0:
            raise ValidationError("heat capacity c_w must be positive")
        if self.kappa0 <= 0 or self.kappa2 <= 0:
            raise ValidationError("conductivity coefficients must be positive",
                                  assumption="(A4)")
        if self.lam < 0:
            raise ValidationError("boundary relaxation lambda must be nonnegative")
        if self.theta0 <= 0:
            raise ValidationError("background temperature theta0 must be positive")
        if self.epsilon < 0:
            raise ValidationError("regularization strength epsilon must be nonnegative")

    def kappa(self, theta):
        """Heat conductivity kappa(theta) = kappa0 + kappa2 theta^2."""
        theta = np.asarray(theta, dtype=float)
        return self.kappa0 + self.kappa2 * theta * theta

    def kappa_bounds(self):
        """(c_kappa, C_kappa) with c (1+theta^2) <= kappa(theta) <= C (1+theta^2)."""
        return (min(self.kappa0, self.kappa2), max(self.kappa0, self.kappa2))

    @property
    def w0(self):
        """Boundary entropy variable log(theta0)."""
        return float(np.log(self.theta0))


@dataclass
class LocalState:
    """Primal state at one point: partial densities rho_i > 0, temperature theta > 0."""

    rho: np.ndarray
    theta: float

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if np.any(self.rho <= 0) or self.theta <= 0:
            raise ValidationError("state requires rho_i > 0 and theta > 0")

    @property
    def rho_total(self):
        return float(self.rho.sum())


@dataclass
class LocalEntropyVars:
    """Relative entropy variables at one point: w_1..w_{n-1} and wlog = log theta.

    Any finite real vector is admissible; that unconstrainedness is the point
    of the change of variables.
    """

    w: np.ndarray
    wlog: float

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.wlog)):
            raise ValidationError("entropy variables must be finite")


def chemical_potential(params, rho, theta):
    """mu_i = (theta/m_i) log(rho_i/m_i) - c_w theta (log theta - 1)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t = theta[..., None]
    return (t / params.m) * np.log(rho / params.m) \
        - params.c_w * t * (np.log(t) - 1.0)


def free_energy(params, rho, theta):
    """Partial Helmholtz free energies psi_i(rho_i, theta) of the simple mixture."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t = theta[..., None]
    x = rho / params.m
    return t * x * (np.log(x) - 1.0) - params.c_w * rho * t * (np.log(t) - 1.0)


def entropy_density(params, rho, theta):
    """Mathematical entropy h = sum_i (rho_i/m_i)(log(rho_i/m_i) - 1) - c_w rho log theta.

    This is the negative of the physical entropy density; it decreases along
    solutions.
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x = rho / params.m
    return np.sum(x * (np.log(x) - 1.0), axis=-1) \
        - params.c_w * rho.sum(axis=-1) * np.log(theta)


def internal_energy(params, rho, theta):
    """Total internal energy density E = c_w rho theta (rho = total density)."""
    rho = np.asarray(rho, dtype=float)
    return params.c_w * rho.sum(axis=-1) * np.asarray(theta, dtype=float)


def partial_pressure(params, rho, theta):
    """Partial pressures p_i = rho_i theta / m_i."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return rho * theta[..., None] / params.m


def total_pressure(params, rho, theta):
    return partial_pressure(params, rho, theta).sum(axis=-1)


def driving_force(params, grad_rho_theta):
    """Thermodynamic driving forces d_i = grad(rho_i theta) / m_i.

    ``grad_rho_theta`` holds the spatial gradients of the products rho_i theta
    (shape (..., n)).  By linearity sum_i d_i equals the gradient of the total
    pressure.
    """
    return np.asarray(grad_rho_theta, dtype=float) / params.m


def entropy_vars_from_state(params, state):
    """Map a primal state to (w_1..w_{n-1}, w = log theta).

    w_i = (mu_i - mu_n)/theta = (1/m_i) log(rho_i/m_i) - (1/m_n) log(rho_n/m_n).
    """
    rho, m = state.rho, params.m
    logs = np.log(rho / m) / m
    return LocalEntropyVars(w=logs[:-1] - logs[-1], wlog=float(np.log(state.theta)))


def state_from_entropy_vars(params, ev, rho_total):
    """Invert the entropy-variable map at fixed total density.

    Returns the unique positive state with sum_i rho_i = rho_total,
    theta = exp(wlog) and entropy_vars_from_state inverting it.  The last
    density rho_n solves the scalar monotone equation

        t + sum_{i<n} m_i exp(m_i w_i) (t/m_n)^(m_i/m_n) = rho_total,

    located by bisection in log t (the left-hand side is strictly increasing),
    after which rho_i = m_i exp(m_i w_i) (rho_n/m_n)^(m_i/m_n).  Solving for
    rho_n directly keeps every component accurate in *relative* terms even
    when rho_n is many orders of magnitude below rho_total.
    """
    if rho_total <= 0:
        raise StateRecoveryError("total density must be positive")
    w, wlog = ev.w, ev.wlog
    rho, theta = _recover_single(params.m, float(rho_total), w, wlog)
    return LocalState(rho=rho, theta=theta)


# Fixed bisection depth: 64 halvings of a ~745-wide log-interval narrow the
# root below double precision; a fixed count keeps runs bitwise reproducible.
_BISECT_ITERS = 64
_LOG_SPAN = 745.0


def _recover_single(m, rho_total, w, wlog):
    n = len(m)
    if abs(wlog) > _EXP_LIMIT:
        raise StateRecoveryError(f"log-temperature overflow: w = {wlog:.3g}")
    expo = m[:-1] * np.asarray(w, dtype=float)
    if np.any(expo > _EXP_LIMIT):
        raise StateRecoveryError("overflow in exp(m_i w_i); entropy variables too large")
    a = m[:-1] * np.exp(expo)
    p = m[:-1] / m[-1]
    log_mn = np.log(m[-1])
    hi = np.log(rho_total)
    lo = hi - _LOG_SPAN
    with np.errstate(over="ignore"):
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            g = np.exp(mid) + np.sum(a * np.exp(p * (mid - log_mn))) - rho_total
            if g > 0.0:
                hi = mid
            else:
                lo = mid
    t = np.exp(0.5 * (lo + hi))
    rho = np.empty(n)
    rho[-1] = t
    rho[:-1] = a * (t / m[-1]) ** p
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise StateRecoveryError("non-finite densities recovered; bracket collapsed")
    return rho, float(np.exp(wlog))


def entropy_gradient(params, rho, theta):
    """Partial derivatives of h w.r.t. (rho_1..rho_{n-1}, theta) at fixed total density.

    The density components reproduce the relative entropy variables w_i; the
    temperature component is -c_w rho / theta.
    """
    rho = np.asarray(rho, dtype=float)
    m = params.m
    logs = np.log(rho / m) / m
    return logs[..., :-1] - logs[..., -1:], \
        -params.c_w * rho.sum(axis=-1) / np.asarray(theta, dtype=float)


def entropy_hessian(params, rho, theta):
    """Hessian of h in (rho_1..rho_{n-1}, theta) at fixed total density.

    Block diagonal: R_ij = delta_ij/(m_i rho_i) + 1/(m_n rho_n) and the scalar
    c_w rho / theta^2.  Symmetric positive definite for any admissible state,
    which is what makes the entropy strictly convex.
    """
    rho = np.asarray(rho, dtype=float)
    n = params.n
    H = np.full((n, n), 0.0)
    R = np.diag(1.0 / (params.m[:-1] * rho[:-1])) + 1.0 / (params.m[-1] * rho[-1])
    H[: n - 1, : n - 1] = R
    H[n - 1, n - 1] = params.c_w * rho.sum() / float(theta) ** 2
    return H


def entropy_variables_q(params, rho, theta):
    """Thermo-chemical potentials q_i = mu_i/theta (the unreduced entropy variables)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.log(rho / params.m) / params.m \
        - params.c_w * (np.log(theta)[..., None] - 1.0)
