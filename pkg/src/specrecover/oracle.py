"""Fine-grid basis pursuit: an independent upper bound on the atomic norm.

Restricting the atoms to frequencies j/G turns the atomic norm into an l1
problem. The rows of the partial DFT matrix are orthogonal, so the affine
projection inside ADMM is two FFTs. Every ``check_every`` iterations the
current support is polished by least squares and a dual vector is formed;
the run stops once the primal value and the dual lower bound agree to
``tol``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize


@dataclass
class GridResult:
    value: float  # feasible objective (upper bound on the grid optimum)
    lower_bound: float
    coefficients: np.ndarray
    iterations: int
    converged: bool


def soft_threshold(v: np.ndarray, thresh: float) -> np.ndarray:
    """Complex magnitude shrinkage."""
    mag = np.abs(v)
    return v * np.maximum(1.0 - thresh / np.maximum(mag, 1e-300), 0.0)


class _PartialDFT:
    """Rows ``idx`` of the G-point synthesis matrix, scaled so that A A^H = I."""

    def __init__(self, idx: np.ndarray, g: int):
        self.idx = idx
        self.g = g
        self.root_g = np.sqrt(g)

    def forward(self, c):
        return np.fft.ifft(c)[self.idx] * self.root_g

    def adjoint(self, y):
        pad = np.zeros(self.g, dtype=complex)
        pad[self.idx] = y
        return np.fft.fft(pad) / self.root_g

    def columns(self, support):
        return np.exp(2j * np.pi * np.outer(self.idx, support) / self.g) / self.root_g


def _bounds(op: _PartialDFT, b, z, u, rho, active_tol: float = 1e-3):
    """(upper, lower, coefficients) certified from the current iterates.

    The lower bound comes from the scaled ADMM multiplier, rescaled into the
    dual-feasible set. The upper bound is the better of the projected z
    iterate and a sign-constrained fit on the dual's active set.
    """
    best_c = z - op.adjoint(op.forward(z) - b)
    upper = float(np.sum(np.abs(best_c)))
    y = rho * op.forward(u)
    corr = op.adjoint(y)
    kappa = float(np.max(np.abs(corr)))
    if kappa <= 0.0:
        return upper, 0.0, best_c
    lower = max(0.0, float(np.real(np.vdot(y, b))) / kappa)
    corr = corr / kappa
    active = np.flatnonzero(np.abs(corr) >= 1.0 - active_tol)
    if active.size <= 4 * op.idx.size:
        signs = corr[active] / np.abs(corr[active])
        cols = op.columns(active) * signs
        stacked = np.vstack([cols.real, cols.imag])
        r, _ = scipy.optimize.nnls(stacked, np.concatenate([b.real, b.imag]), maxiter=50 * active.size + 100)
        cand = np.zeros(op.g, dtype=complex)
        cand[active] = r * signs
        cand = cand - op.adjoint(op.forward(cand) - b)
        val = float(np.sum(np.abs(cand)))
        if val < upper:
            upper, best_c = val, cand
    return upper, lower, best_c


def grid_basis_pursuit(x, indices, grid_size: int, tol: float = 1e-4, max_iters: int = 50_000,
                       rho: float = 1.0, check_every: int = 100) -> GridResult:
    """min sum|c_j| s.t. sum_j c_j exp(2 pi i j l / G) = x[l] for l in ``indices``."""
    idx = np.asarray(indices, dtype=np.int64)
    x = np.asarray(x, dtype=complex)
    if x.shape != idx.shape:
        raise ValueError("x and indices differ in length")
    if idx.size and (idx.min() < 0 or idx.max() >= grid_size or np.unique(idx).size != idx.size):
        raise ValueError("indices must be distinct and inside [0, G)")
    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0:
        return GridResult(0.0, 0.0, np.zeros(grid_size, dtype=complex), 0, True)
    op = _PartialDFT(idx, grid_size)
    b = x / norm_x
    unscale = norm_x / op.root_g

    def project(v):
        return v - op.adjoint(op.forward(v) - b)

    z = np.zeros(grid_size, dtype=complex)
    u = np.zeros(grid_size, dtype=complex)
    upper, lower, best = np.inf, 0.0, z
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        c = project(z - u)
        z = soft_threshold(c + u, 1.0 / rho)
        u = u + c - z
        if it % check_every == 0 or it == max_iters:
            up, lo, cand = _bounds(op, b, z, u, rho)
            if up < upper:
                upper, best = up, cand
            lower = max(lower, lo)
            if upper - lower <= tol * upper:
                converged = True
                break
    return GridResult(upper * unscale, lower * unscale, best * unscale, it, converged)


def grid_atomic_norm(x, indices, grid_size: int, **kwargs) -> float:
    return grid_basis_pursuit(x, indices, grid_size, **kwargs).value
