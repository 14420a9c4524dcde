"""Known-poles recovery pipeline and trial scoring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .certificate import DEFAULT_BAND, DEFAULT_GRID, DualPolynomial, localize
from .linalg import least_squares
from .model import Instance, LineSpectrum, SpectralLine, atom_matrix, wrap_distance
from .sdp import SolverParams, solve_conditional, solve_dual, solve_primal


NULL_RESIDUAL = 1e-9
PRUNE_REL = 2e-2  # localized lines below this fraction of the largest amplitude are dropped


@dataclass(frozen=True)
class ScoringTolerances:
    freq_tol: float = 1e-3
    coeff_rel_tol: float = 1e-2

    def __post_init__(self):
        if not (self.freq_tol > 0 and self.coeff_rel_tol > 0):
            raise ValueError("scoring tolerances must be positive")


@dataclass
class RecoveryResult:
    estimate: LineSpectrum
    k: int
    matches: list[bool]
    converged: bool
    diagnostics: dict = field(default_factory=dict)
    toeplitz: np.ndarray | None = None  # generator of the solution Toeplitz block

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "matches": list(self.matches),
            "converged": self.converged,
            "estimate": [
                {"freq": ln.freq, "amplitude": ln.amplitude, "phase": ln.phase, "known": ln.known}
                for ln in self.estimate
            ],
            "diagnostics": {key: _jsonable(v) for key, v in self.diagnostics.items()},
            "toeplitz": None if self.toeplitz is None else [[z.real, z.imag] for z in self.toeplitz.tolist()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def solve_coefficients(freqs, indices, samples) -> np.ndarray:
    """Least-squares complex amplitudes of phaseless atoms at ``freqs`` on ``indices``.

    More frequencies than indices gives the minimum-norm solution.
    """
    freqs = np.asarray(freqs, dtype=float)
    idx = np.asarray(indices)
    if idx.size < 1:
        raise ValueError("need at least one sample index")
    if freqs.size == 0:
        return np.zeros(0, dtype=complex)
    return least_squares(atom_matrix(freqs, idx), samples)


def score(truth: LineSpectrum, estimate: LineSpectrum, tol: ScoringTolerances | None = None):
    """Count truth lines recovered in frequency and complex coefficient.

    Known truth lines are checked on the coefficient of the estimate line
    reported for the same known pole. Unknown lines are paired greedily by
    ascending wrap distance within ``freq_tol``.
    """
    tol = tol or ScoringTolerances()
    truth_lines = list(truth)
    est_lines = list(estimate)
    matches = [False] * len(truth_lines)
    used = [False] * len(est_lines)

    def coef_ok(t: SpectralLine, e: SpectralLine) -> bool:
        c = t.coefficient
        return abs(e.coefficient - c) <= tol.coeff_rel_tol * abs(c)

    known_est = [j for j, e in enumerate(est_lines) if e.known]
    for i, t in enumerate(truth_lines):
        if not t.known or not known_est:
            continue
        j = min(known_est, key=lambda j: (wrap_distance(t.freq, est_lines[j].freq), est_lines[j].freq))
        if used[j] or wrap_distance(t.freq, est_lines[j].freq) > tol.freq_tol:
            continue
        used[j] = True
        matches[i] = coef_ok(t, est_lines[j])

    pairs = []
    for i, t in enumerate(truth_lines):
        if t.known:
            continue
        for j, e in enumerate(est_lines):
            if e.known:
                continue
            dist = wrap_distance(t.freq, e.freq)
            if dist <= tol.freq_tol:
                pairs.append((dist, t.freq, e.freq, i, j))
    pairs.sort()
    taken = set()
    for _, _, _, i, j in pairs:
        if i in taken or used[j]:
            continue
        taken.add(i)
        used[j] = True
        matches[i] = coef_ok(truth_lines[i], est_lines[j])
    return sum(matches), matches


def recover(instance: Instance, solver: SolverParams | None = None, scoring: ScoringTolerances | None = None,
            grid_size: int = DEFAULT_GRID, band: float = DEFAULT_BAND,
            prune_rel: float = PRUNE_REL) -> RecoveryResult:
    """Conditional solve, dual solve, peak localization, then a joint coefficient fit."""
    solver = solver or SolverParams()
    scoring = scoring or ScoringTolerances()
    if not 0.0 <= prune_rel < 1.0:
        raise ValueError("prune_rel must lie in [0, 1)")
    obs = instance.observed
    known = instance.known_freqs
    if known.size == 0:
        sol = solve_primal(instance, solver)
        x_tilde = sol.x_hat
        ambiguous = False
    else:
        sol = solve_conditional(instance, solver)
        x_tilde = sol.x_tilde
        ambiguous = sol.ambiguous
    b = x_tilde[obs]
    if np.linalg.norm(b) <= NULL_RESIDUAL * np.linalg.norm(instance.samples):
        # known poles explain the data; a dual for rounding noise would invent peaks
        b = np.zeros_like(b)
    dual = solve_dual(b, obs, instance.n, solver, warm_start=sol)
    poly = DualPolynomial.from_dual(dual)
    found = localize(poly, exclude=known, grid_size=max(grid_size, 4 * instance.n), band=band)
    kept = np.asarray(found, dtype=float)
    while True:  # strictly shrinks, so it terminates
        freqs = np.concatenate([known, kept])
        coefs = solve_coefficients(freqs, obs, instance.samples)
        mags = np.abs(coefs)
        # degenerate duals touch 1 where the primal carries no mass; such peaks fit near-zero amplitudes
        keep = mags[known.size:] >= prune_rel * mags.max(initial=0.0)
        if keep.all():
            break
        kept = kept[keep]
    lines = []
    for j, (f, c) in enumerate(zip(freqs, coefs)):
        if abs(c) == 0.0:
            continue
        lines.append(SpectralLine.from_coefficient(f, complex(c), known=j < known.size))
    estimate = LineSpectrum(tuple(lines))
    k, matches = score(instance.truth, estimate, scoring)
    max_q = float(poly.grid_abs(max(grid_size, 4 * instance.n)).max()) if dual.q.size else 0.0
    diagnostics = {
        "primal_objective": sol.objective,
        "dual_objective": dual.objective,
        "gap": sol.objective - dual.objective,
        "primal_iterations": sol.iterations,
        "dual_iterations": dual.iterations,
        "max_abs_q": max_q,
        "peaks": list(found),
        "localized": [float(f) for f in kept],
        "underdetermined": bool(freqs.size > obs.size),
        "ambiguous_known": bool(ambiguous),
    }
    return RecoveryResult(estimate, k, matches, bool(sol.converged and dual.converged), diagnostics,
                          toeplitz=np.array(sol.toeplitz))
