"""Hot numeric kernels.

Every function here is written in the numpy subset numba understands. When
numba is importable and ``SPECRECOVER_DISABLE_NUMBA`` is unset (or ``0``), the
kernels are compiled with ``@njit``; otherwise the very same source runs as
plain numpy. ``BACKEND`` reports which path is live.
"""

import os

import numpy as np

_DISABLE = os.environ.get("SPECRECOVER_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit as _njit
except ImportError:
    BACKEND = "numpy"

    def jit(fn):
        return fn

else:
    BACKEND = "numba"

    def jit(fn):
        return _njit(cache=True, nogil=True)(fn)


# the bordered ADMM operates in one of two roles
MODE_PRIMAL = 0
MODE_DUAL = 1


@jit
def toeplitz_expand(gen):
    n = gen.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        out[j, : j + 1] = gen[j::-1]
        out[j, j + 1 :] = np.conj(gen[1 : n - j])
    return out


@jit
def diagonal_sums(mat):
    # adjoint of toeplitz_expand restricted to the lower triangle
    n = mat.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        out[: j + 1] += mat[j, j::-1]
    return out


@jit
def hermitize(mat):
    return 0.5 * (mat + np.conj(mat.T))


@jit
def psd_project(mat):
    w, v = np.linalg.eigh(hermitize(mat))
    w = np.maximum(w, 0.0)
    out = (v * w) @ np.conj(v.T)
    return hermitize(out)


@jit
def _primal_block(w, obs, b, a_known, a_pinv, rho, trace_weight):
    """Closed-form minimizer of the (u, x, t) block given W = Z - U."""
    n = w.shape[0] - 1
    ds = diagonal_sums(w[:n, :n])
    gen = np.empty(n, dtype=np.complex128)
    for k in range(1, n):
        gen[k] = ds[k] / (n - k)
    gen[0] = ds[0].real / n - 0.5 * trace_weight / rho
    x = w[:n, n].copy()
    if a_known.shape[1] > 0:
        d = a_pinv @ (b - x[obs])
        x[obs] = b - a_known @ d
    else:
        d = np.zeros(0, dtype=np.complex128)
        x[obs] = b
    t = w[n, n].real - 0.5 / rho
    theta = np.empty_like(w)
    theta[:n, :n] = toeplitz_expand(gen)
    theta[:n, n] = x
    theta[n, :n] = np.conj(x)
    theta[n, n] = t
    return theta, d


@jit
def _dual_block(w, obs, b, rho, trace_weight):
    """Projection of W onto the dual-norm certificate's affine set, plus the q step."""
    n = w.shape[0] - 1
    ds = diagonal_sums(w[:n, :n])
    shift = np.empty(n, dtype=np.complex128)
    for k in range(1, n):
        shift[k] = ds[k] / (n - k)
    shift[0] = ds[0].real / n - trace_weight
    q = np.zeros(n, dtype=np.complex128)
    q[obs] = w[obs, n] + b / (2.0 * rho)
    theta = np.empty_like(w)
    theta[:n, :n] = w[:n, :n] - toeplitz_expand(shift)
    theta[:n, n] = q
    theta[n, :n] = np.conj(q)
    theta[n, n] = 1.0
    return theta


@jit
def admm_bordered(mode, obs, b, a_known, a_pinv, trace_weight, z, u, rho, max_iters, eps_abs, eps_rel, alpha, adapt_every):
    """ADMM on a bordered (n+1)x(n+1) PSD constraint.

    ``z`` and ``u`` are the starting consensus variable and scaled multiplier
    (both copied). Returns ``(theta, z, u, d, rho, iters, r_pri, r_dual,
    converged)``.
    """
    dim = z.shape[0]
    z = z.copy()
    u = u.copy()
    d = np.zeros(a_known.shape[1], dtype=np.complex128)
    theta = z.copy()
    r_pri = np.inf
    r_dual = np.inf
    converged = False
    iters = 0
    for it in range(max_iters):
        iters = it + 1
        w = z - u
        if mode == MODE_PRIMAL:
            theta, d = _primal_block(w, obs, b, a_known, a_pinv, rho, trace_weight)
        else:
            theta = _dual_block(w, obs, b, rho, trace_weight)
        relaxed = alpha * theta + (1.0 - alpha) * z
        z_old = z
        z = psd_project(relaxed + u)
        u = u + relaxed - z
        r_pri = np.linalg.norm(theta - z)
        r_dual = rho * np.linalg.norm(z - z_old)
        eps_pri = dim * eps_abs + eps_rel * max(np.linalg.norm(theta), np.linalg.norm(z))
        eps_dual = dim * eps_abs + eps_rel * rho * np.linalg.norm(u)
        if r_pri <= eps_pri and r_dual <= eps_dual:
            converged = True
            break
        if adapt_every > 0 and iters % adapt_every == 0:
            if r_pri > 10.0 * r_dual:
                rho *= 2.0
                u = u / 2.0
            elif r_dual > 10.0 * r_pri:
                rho /= 2.0
                u = u * 2.0
    # report the affine-side iterate from the final consensus point
    w = z - u
    if mode == MODE_PRIMAL:
        theta, d = _primal_block(w, obs, b, a_known, a_pinv, rho, trace_weight)
    else:
        theta = _dual_block(w, obs, b, rho, trace_weight)
    return theta, z, u, d, rho, iters, r_pri, r_dual, converged


@jit
def dual_poly_abs(q, support, f):
    acc = 0.0 + 0.0j
    for idx in range(support.shape[0]):
        acc += q[idx] * np.exp(-2j * np.pi * f * support[idx])
    return np.abs(acc)


@jit
def golden_max(q, support, lo, hi, tol):
    """Golden-section search for the maximizer of |Q| on [lo, hi]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a = lo
    b = hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = dual_poly_abs(q, support, c)
    fd = dual_poly_abs(q, support, d)
    while b - a > tol:
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - inv_phi * (b - a)
            fc = dual_poly_abs(q, support, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + inv_phi * (b - a)
            fd = dual_poly_abs(q, support, d)
    x = 0.5 * (a + b)
    return x, dual_poly_abs(q, support, x)
