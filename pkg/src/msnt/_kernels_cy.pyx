# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: batched state recovery and face flux assembly.

Contract-identical to msnt._kernels_py; small dense systems (n <= 16) are
factored with an inlined partial-pivoting LU per face.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, log1p, sqrt

from .errors import StateRecoveryError

cnp.import_array()

BACKEND_NAME = "compiled"

# stack-buffer limit on the species count (array sizes below are 16 and 16*16)
MAXN = 16

cdef double EXP_LIMIT = 700.0
cdef int BISECT_ITERS = 64
cdef double LOG_SPAN = 745.0


cdef int _lu_factor(double* a, int* piv, int n) noexcept nogil:
    """In-place LU with partial pivoting; returns a nonzero code on a zero pivot."""
    cdef int i, j, k, p
    cdef double amax, tmp
    for k in range(n):
        p = k
        amax = fabs(a[k * n + k])
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > amax:
                amax = fabs(a[i * n + k])
                p = i
        piv[k] = p
        if amax == 0.0:
            return k + 1
        if p != k:
            for j in range(n):
                tmp = a[k * n + j]
                a[k * n + j] = a[p * n + j]
                a[p * n + j] = tmp
        for i in range(k + 1, n):
            a[i * n + k] /= a[k * n + k]
            for j in range(k + 1, n):
                a[i * n + j] -= a[i * n + k] * a[k * n + j]
    return 0


cdef void _lu_solve(double* a, int* piv, double* x, int n) noexcept nogil:
    cdef int i, j
    cdef double tmp
    for i in range(n):
        if piv[i] != i:
            tmp = x[i]
            x[i] = x[piv[i]]
            x[piv[i]] = tmp
    for i in range(1, n):
        for j in range(i):
            x[i] -= a[i * n + j] * x[j]
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            x[i] -= a[i * n + j] * x[j]
        x[i] /= a[i * n + i]


def recover_states(m, rho_total, W):
    """See msnt._kernels_py.recover_states."""
    cdef double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[::1] rtv = np.ascontiguousarray(rho_total, dtype=np.float64)
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef Py_ssize_t N = Wv.shape[0]
    cdef int n = <int> Wv.shape[1]
    if n > 16:
        raise ValueError(f"species count {n} exceeds compiled limit 16")
    rho_arr = np.empty((N, n), dtype=np.float64)
    theta_arr = np.empty(N, dtype=np.float64)
    cdef double[:, ::1] rho = rho_arr
    cdef double[::1] theta = theta_arr
    cdef double a[16]
    cdef double p[16]
    cdef Py_ssize_t k
    cdef int i, it, bad = 0
    cdef double wlog, rho_tot, log_mn, lo, hi, mid, g, t
    with nogil:
        log_mn = log(mv[n - 1])
        for i in range(n - 1):
            p[i] = mv[i] / mv[n - 1]
        for k in range(N):
            wlog = Wv[k, n - 1]
            if fabs(wlog) > EXP_LIMIT:
                bad = 1
                break
            for i in range(n - 1):
                g = mv[i] * Wv[k, i]
                if g > EXP_LIMIT:
                    bad = 2
                    break
                a[i] = mv[i] * exp(g)
            if bad:
                break
            rho_tot = rtv[k]
            hi = log(rho_tot)
            lo = hi - LOG_SPAN
            for it in range(BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                g = exp(mid) - rho_tot
                for i in range(n - 1):
                    g += a[i] * exp(p[i] * (mid - log_mn))
                if g > 0.0:
                    hi = mid
                else:
                    lo = mid
            t = exp(0.5 * (lo + hi))
            rho[k, n - 1] = t
            for i in range(n - 1):
                rho[k, i] = a[i] * exp(p[i] * (log(t) - log_mn))
            theta[k] = exp(wlog)
    if bad == 1:
        raise StateRecoveryError("log-temperature overflow in state recovery")
    if bad == 2:
        raise StateRecoveryError("overflow in exp(m_i w_i) during state recovery")
    if not np.all(np.isfinite(rho_arr)) or np.any(rho_arr <= 0):
        raise StateRecoveryError("non-finite densities in batched state recovery")
    return rho_arr, theta_arr


def face_fluxes(m, b, double kappa0, double kappa2, rho_f, theta_l, theta_r,
                gw, gwlog):
    """See msnt._kernels_py.face_fluxes."""
    cdef double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[:, ::1] rf = np.ascontiguousarray(rho_f, dtype=np.float64)
    cdef double[::1] tl = np.ascontiguousarray(theta_l, dtype=np.float64)
    cdef double[::1] tr = np.ascontiguousarray(theta_r, dtype=np.float64)
    cdef double[:, ::1] gwv = np.ascontiguousarray(gw, dtype=np.float64)
    cdef double[::1] glv = np.ascontiguousarray(gwlog, dtype=np.float64)
    cdef Py_ssize_t F = rf.shape[0]
    cdef int n = <int> rf.shape[1]
    if n > 16:
        raise ValueError(f"species count {n} exceeds compiled limit 16")
    jmass_arr = np.zeros((F, n), dtype=np.float64)
    je_arr = np.zeros(F, dtype=np.float64)
    cdef double[:, ::1] jm = jmass_arr
    cdef double[::1] je = je_arr
    cdef double K[256]
    cdef double M[256]
    cdef double sq[16]
    cdef double x1[16]
    cdef double x2[16]
    cdef int piv[16]
    cdef Py_ssize_t f
    cdef int i, j, fail = 0
    cdef double rtot, s1, s2, S, Bth, th, x, kap, gl, acc
    with nogil:
        for f in range(F):
            rtot = 0.0
            for i in range(n):
                sq[i] = sqrt(rf[f, i])
                rtot += rf[f, i]
            # friction matrix
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    if j != i:
                        acc += bv[i, j] * rf[f, j]
                        M[i * n + j] = -bv[i, j] * sq[i] * sq[j]
                M[i * n + i] = acc
            # K = M P_L + P_perp with P_L = I - sq sq^T / rtot
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += M[i * n + j] * sq[j]
                acc /= rtot
                for j in range(n):
                    K[i * n + j] = M[i * n + j] - acc * sq[j] + sq[i] * sq[j] / rtot
            if _lu_factor(K, piv, n):
                fail = 1
                break
            gl = glv[f]
            for i in range(n - 1):
                x1[i] = sq[i] * gwv[f, i]
            x1[n - 1] = 0.0
            for i in range(n):
                x2[i] = sq[i] / mv[i]
            _lu_solve(K, piv, x1, n)
            _lu_solve(K, piv, x2, n)
            # project onto L and rescale by sqrt(rho): (A v)_i = sq_i (P_L x)_i
            s1 = 0.0
            s2 = 0.0
            for i in range(n):
                s1 += sq[i] * x1[i]
                s2 += sq[i] * x2[i]
            s1 /= rtot
            s2 /= rtot
            S = 0.0
            Bth = 0.0
            for i in range(n):
                x1[i] = sq[i] * (x1[i] - sq[i] * s1)   # (A g)_i
                x2[i] = sq[i] * (x2[i] - sq[i] * s2)   # (A 1/m)_i
                jm[f, i] = -(x1[i] + x2[i] * gl)
                S += x2[i] / mv[i]
                if i < n - 1:
                    Bth += x2[i] * gwv[f, i]
            # compatible face temperature and conductivity
            x = (tr[f] - tl[f]) / tl[f]
            if fabs(x) < 1e-8:
                th = tr[f] * (1.0 - 0.5 * x)
            else:
                th = tr[f] * log1p(x) / x
            kap = kappa0 + kappa2 * th * th
            je[f] = -th * ((kap + S) * gl + Bth)
    if fail:
        raise ValueError("singular constrained friction system at a face")
    return jmass_arr, je_arr
