"""Dense Hermitian/Toeplitz helpers used by the solvers."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import _kernels


class LinalgError(RuntimeError):
    pass


def as_generator(gen) -> np.ndarray:
    """Validate a Toeplitz generator (first column, real leading entry)."""
    g = np.asarray(gen, dtype=np.complex128).ravel()
    if g.size == 0:
        raise ValueError("empty Toeplitz generator")
    if g[0].imag != 0.0:
        raise ValueError("generator entry 0 must be real")
    return np.ascontiguousarray(g)


def toeplitz_expand(gen) -> np.ndarray:
    """Hermitian Toeplitz matrix with ``T[j, k] = gen[j - k]`` for ``j >= k``."""
    return _kernels.toeplitz_expand(as_generator(gen))


def diagonal_sums(mat) -> np.ndarray:
    """``out[k] = sum_j mat[j + k, j]``, the adjoint of :func:`toeplitz_expand` on the lower triangle."""
    a = np.ascontiguousarray(mat, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("diagonal_sums needs a square matrix")
    return _kernels.diagonal_sums(a)


def is_hermitian(mat, tol: float = 0.0) -> bool:
    a = np.asarray(mat)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T), initial=0.0) <= tol


def psd_project(mat) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped)."""
    a = np.ascontiguousarray(mat, dtype=np.complex128)
    if not is_hermitian(a, 1e-8 * (1.0 + np.max(np.abs(a), initial=0.0))):
        raise ValueError("psd_project needs a Hermitian matrix")
    try:
        return _kernels.psd_project(a)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"eigensolver failed: {exc}") from exc


def min_eigenvalue(mat) -> float:
    return float(np.linalg.eigvalsh(_kernels.hermitize(np.asarray(mat, dtype=np.complex128)))[0])


def least_squares(a, b) -> np.ndarray:
    """Minimum-norm least-squares solution via QR with column pivoting."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[1] == 0:
        return np.zeros(a.shape[1] if a.ndim == 2 else 0, dtype=np.complex128)
    if not np.any(a):
        return np.zeros(a.shape[1], dtype=np.complex128)
    z, *_ = scipy.linalg.lstsq(a, b, lapack_driver="gelsy")
    return z


def pseudo_inverse(a) -> tuple[np.ndarray, int]:
    """``(pinv(a), rank)``; rank is used to flag non-identifiable known-pole sets."""
    a = np.asarray(a, dtype=np.complex128)
    if a.shape[1] == 0:
        return np.zeros((0, a.shape[0]), dtype=np.complex128), 0
    pinv, rank = scipy.linalg.pinv(a, return_rank=True)
    return np.ascontiguousarray(pinv), int(rank)
