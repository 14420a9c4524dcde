"""Dual polynomial evaluation, peak localization, and Caratheodory decomposition."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .linalg import least_squares, toeplitz_expand
from .model import atom_matrix, wrap_distance
from .sdp import DualSolution

DEFAULT_GRID = 2 ** 14
DEFAULT_BAND = 1e-3
REFINE_TOL = 1e-8


@dataclass(frozen=True)
class DualPolynomial:
    """Q(f) = sum over the support of q[l] exp(-2 pi i f l)."""

    q: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=np.int64)
        q = np.asarray(self.q, dtype=complex)
        if sup.shape != q.shape:
            raise ValueError("q and support differ in length")
        if np.any(np.diff(sup) <= 0) or (sup.size and sup[0] < 0):
            raise ValueError("support must be sorted, distinct, non-negative")
        object.__setattr__(self, "support", np.ascontiguousarray(sup))
        object.__setattr__(self, "q", np.ascontiguousarray(q))

    @classmethod
    def from_dual(cls, dual: DualSolution) -> "DualPolynomial":
        return cls(dual.q, dual.support)

    def grid_abs(self, grid_size: int) -> np.ndarray:
        """|Q| at f = j / grid_size, j = 0..grid_size-1."""
        if self.support.size == 0:
            return np.zeros(grid_size)
        if self.support[-1] >= grid_size:
            return np.abs(atom_matrix(np.arange(grid_size) / grid_size, self.support).conj().T @ self.q)
        padded = np.zeros(grid_size, dtype=complex)
        padded[self.support] = self.q
        return np.abs(np.fft.fft(padded))


def dual_poly_eval(poly: DualPolynomial, f) -> complex | np.ndarray:
    vals = np.exp(-2j * np.pi * np.multiply.outer(np.asarray(f, dtype=float), poly.support)) @ poly.q
    return complex(vals) if np.ndim(vals) == 0 else vals


def localize(poly: DualPolynomial, exclude=(), grid_size: int = DEFAULT_GRID, band: float = DEFAULT_BAND,
             n: int | None = None) -> list[float]:
    """Frequencies where |Q| touches 1 (within ``band``), excluding known poles.

    Grid maxima are refined by golden-section search; peaks within ``2/grid_size``
    of an excluded frequency are dropped.
    """
    if n is not None and grid_size < 4 * n:
        raise ValueError(f"grid_size {grid_size} below 4n = {4 * n}")
    if not 0 < band <= 1e-2:
        raise ValueError("band must lie in (0, 1e-2]")
    if poly.support.size == 0 or not np.any(poly.q):
        return []
    vals = poly.grid_abs(grid_size)
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    # grid points can sit up to half a cell off the true peak
    cand = np.flatnonzero((vals >= left) & (vals > right) & (vals >= 1.0 - 2.0 * band))
    step = 1.0 / grid_size
    peaks: list[tuple[float, float]] = []
    for j in cand:
        f, v = _kernels.golden_max(poly.q, poly.support, (j - 1) * step, (j + 1) * step, REFINE_TOL)
        if v < 1.0 - band:
            continue
        f = float(f % 1.0)
        if any(wrap_distance(f, e) <= 2.0 * step for e in exclude):
            continue
        peaks.append((f, float(v)))
    peaks.sort()
    merged: list[tuple[float, float]] = []
    for f, v in peaks:
        if merged and wrap_distance(f, merged[-1][0]) <= step:
            if v > merged[-1][1]:
                merged[-1] = (f, v)
            continue
        merged.append((f, v))
    if len(merged) > 1 and wrap_distance(merged[0][0], merged[-1][0]) <= step:
        if merged[-1][1] > merged[0][1]:
            merged[0] = merged[-1]
        merged.pop()
    return sorted(f for f, _ in merged)


def dump_dual_polynomial_csv(poly: DualPolynomial, path, grid_size: int = 4096) -> Path:
    path = Path(path)
    vals = poly.grid_abs(grid_size)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "abs_q"])
        for j, v in enumerate(vals):
            w.writerow([f"{j / grid_size:.10g}", f"{v:.12g}"])
    return path


@dataclass(frozen=True)
class CaratheodoryDecomposition:
    freqs: np.ndarray
    powers: np.ndarray
    rank: int
    unique: bool = True


def caratheodory_decompose(gen, rank_tol: float = 1e-6, power_tol: float = 0.0) -> CaratheodoryDecomposition:
    """T = sum_j powers[j] a(f_j) a(f_j)^H for a PSD Toeplitz T given by its generator.

    Frequencies come from the shift-invariance of the dominant eigenspace.
    A full-rank T has no unique decomposition; the result is flagged.
    Atoms with power below ``power_tol`` times the largest are dropped.
    """
    t = toeplitz_expand(gen)
    n = t.shape[0]
    w, v = np.linalg.eigh(t)
    lam_max = w[-1]
    if lam_max <= 0.0:
        return CaratheodoryDecomposition(np.zeros(0), np.zeros(0), 0, True)
    r = int(np.sum(w > rank_tol * lam_max))
    if r >= n:
        return CaratheodoryDecomposition(np.zeros(0), np.zeros(0), n, False)
    us = v[:, n - r:]
    phi = np.linalg.lstsq(us[:-1], us[1:], rcond=None)[0]
    z = np.linalg.eigvals(phi)
    freqs = np.sort(np.mod(np.angle(z) / (2.0 * np.pi), 1.0))
    freqs = np.where(freqs >= 1.0, 0.0, freqs)
    powers = least_squares(atom_matrix(freqs, np.arange(n)), t[:, 0]).real
    if power_tol > 0.0 and powers.size:
        keep = powers >= power_tol * powers.max()
        freqs, powers = freqs[keep], powers[keep]
    return CaratheodoryDecomposition(freqs, powers, r, True)


def caratheodory_residual(gen, decomp: CaratheodoryDecomposition) -> float:
    """Relative Frobenius error of the reconstruction."""
    t = toeplitz_expand(gen)
    a = atom_matrix(decomp.freqs, np.arange(t.shape[0]))
    approx = (a * decomp.powers) @ a.conj().T
    return float(np.linalg.norm(t - approx) / max(np.linalg.norm(t), 1e-300))
