"""Atomic-norm semidefinite programs solved by a structured ADMM.

All three problems share one bordered constraint

    [[Toeplitz(u), v], [v^H, t]]  >= 0

and differ only in the affine block. Internally the data is normalized to
unit RMS and the Toeplitz block is carried as ``Toeplitz(u) / n`` so that
primal and dual iterates have comparable magnitude; results are mapped back
before they leave this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .linalg import diagonal_sums, min_eigenvalue, pseudo_inverse, toeplitz_expand
from .model import Instance, atom_matrix


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverParams:
    rho: float = 10.0
    max_iters: int = 20_000
    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    over_relaxation: float = 1.5
    adapt_every: int = 100
    dual_rho: float = 1.0
    dual_over_relaxation: float = 1.0  # relaxation stalls the dual iteration near degenerate optima

    def __post_init__(self):
        if not (self.rho > 0 and self.dual_rho > 0):
            raise ValueError("rho and dual_rho must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (0 < self.eps_abs <= 1e-2 and 0 < self.eps_rel <= 1e-2):
            raise ValueError("eps_abs and eps_rel must lie in (0, 1e-2]")
        if not (1.0 <= self.over_relaxation <= 1.8 and 1.0 <= self.dual_over_relaxation <= 1.8):
            raise ValueError("over_relaxation must lie in [1, 1.8]")
        if self.adapt_every < 0:
            raise ValueError("adapt_every must be non-negative")


@dataclass
class _AdmmState:
    """Scaled-space ADMM iterates kept for warm starts."""

    z: np.ndarray
    u: np.ndarray
    rho: float
    scale: float


@dataclass
class PrimalSolution:
    x_hat: np.ndarray
    toeplitz: np.ndarray  # generator (first column) of T_n
    t: float
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    state: _AdmmState | None = field(default=None, repr=False)
    psd_shift: float = 0.0  # diagonal lift applied to reach the cone

    @property
    def bordered(self) -> np.ndarray:
        return bordered_matrix(self.toeplitz, self.x_hat, self.t)


@dataclass
class ConditionalSolution:
    x_tilde: np.ndarray
    d: np.ndarray
    toeplitz: np.ndarray
    t: float
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    known_freqs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ambiguous: bool = False
    state: _AdmmState | None = field(default=None, repr=False)
    psd_shift: float = 0.0

    @property
    def bordered(self) -> np.ndarray:
        return bordered_matrix(self.toeplitz, self.x_tilde, self.t)


@dataclass
class DualSolution:
    q: np.ndarray  # values on ``support`` only
    support: np.ndarray
    certificate: np.ndarray  # H, n x n
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    shrink: float = 1.0  # q was divided by this to restore exact feasibility

    @property
    def q_full(self) -> np.ndarray:
        out = np.zeros(self.certificate.shape[0], dtype=complex)
        out[self.support] = self.q
        return out

    @property
    def bordered(self) -> np.ndarray:
        return bordered_matrix_dense(self.certificate, self.q_full, 1.0)


def bordered_matrix_dense(top: np.ndarray, v: np.ndarray, corner: float) -> np.ndarray:
    n = top.shape[0]
    out = np.empty((n + 1, n + 1), dtype=complex)
    out[:n, :n] = top
    out[:n, n] = v
    out[n, :n] = np.conj(v)
    out[n, n] = corner
    return out


def bordered_matrix(gen, v, t) -> np.ndarray:
    return bordered_matrix_dense(toeplitz_expand(gen), np.asarray(v, dtype=complex), t)


def _conj_sign(mat: np.ndarray) -> np.ndarray:
    """D M D with D = diag(1, ..., 1, -1)."""
    out = mat.copy()
    out[:-1, -1] *= -1.0
    out[-1, :-1] *= -1.0
    return out


def _run(mode, n, observed, b, a_known, a_pinv, z0, u0, rho, params: SolverParams):
    alpha = params.over_relaxation if mode == _kernels.MODE_PRIMAL else params.dual_over_relaxation
    obs = np.ascontiguousarray(observed, dtype=np.int64)
    return _kernels.admm_bordered(
        mode, obs, np.ascontiguousarray(b, dtype=np.complex128),
        np.ascontiguousarray(a_known, dtype=np.complex128), np.ascontiguousarray(a_pinv, dtype=np.complex128),
        1.0, z0, u0, float(rho), int(params.max_iters), float(params.eps_abs), float(params.eps_rel),
        float(alpha), int(params.adapt_every),
    )


def _check_observed(observed, n):
    obs = np.asarray(observed, dtype=np.int64)
    if obs.size == 0:
        raise SolverError("no observations")
    if np.any(np.diff(obs) <= 0) or obs[0] < 0 or obs[-1] >= n:
        raise SolverError("observed indices must be strictly increasing in [0, n)")
    return obs


def _solve_completion(n, observed, samples, known_freqs, params: SolverParams):
    """Shared body of the primal and conditional problems."""
    obs = _check_observed(observed, n)
    b = np.asarray(samples, dtype=np.complex128)
    known_freqs = np.asarray(known_freqs, dtype=float)
    p = known_freqs.size
    a_known = atom_matrix(known_freqs, obs) if p else np.zeros((obs.size, 0), dtype=complex)
    a_pinv, rank = pseudo_inverse(a_known)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        zero = np.zeros(n, dtype=complex)
        return dict(x=zero, d=np.zeros(p, dtype=complex), gen=zero.copy(), t=0.0, objective=0.0,
                    r_pri=0.0, r_dual=0.0, iters=0, converged=True, state=None, ambiguous=rank < p, shift=0.0)
    scale = math.sqrt(obs.size) / norm_b
    root_n = math.sqrt(n)
    zeros = np.zeros((n + 1, n + 1), dtype=np.complex128)
    theta, z, u, d, rho, iters, r_pri, r_dual, conv = _run(
        _kernels.MODE_PRIMAL, n, obs, b * (scale / root_n), a_known, a_pinv, zeros, zeros, params.rho, params)
    gen = theta[:n, 0] * (n / scale)
    gen[0] = gen[0].real
    x = theta[:n, n] * (root_n / scale)
    t = float(theta[n, n].real) / scale
    # lift the iterate onto the cone: T + sI and t + s keep every equality
    shift = max(0.0, -min_eigenvalue(bordered_matrix(gen, x, t)))
    gen[0] += shift
    t += shift
    objective = 0.5 * (float(gen[0].real) + t)
    return dict(x=x, d=d * (root_n / scale), gen=gen, t=t, objective=objective,
                r_pri=float(r_pri) / scale, r_dual=float(r_dual), iters=int(iters), converged=bool(conv),
                state=_AdmmState(z, u, float(rho), scale), ambiguous=rank < p, shift=shift)


def solve_primal(instance: Instance, params: SolverParams | None = None) -> PrimalSolution:
    """Minimize Tr(T)/(2n) + t/2 over the bordered PSD cone with x_hat pinned on the observations."""
    params = params or SolverParams()
    r = _solve_completion(instance.n, instance.observed, instance.samples, [], params)
    return PrimalSolution(r["x"], r["gen"], r["t"], r["objective"], r["r_pri"], r["r_dual"],
                          r["iters"], r["converged"], r["state"], r["shift"])


def solve_conditional(instance: Instance, params: SolverParams | None = None) -> ConditionalSolution:
    """Conditional atomic-norm problem: known-pole components are fitted at zero cost.

    With no known lines this runs exactly the same iteration as :func:`solve_primal`.
    """
    params = params or SolverParams()
    known = instance.known_freqs
    r = _solve_completion(instance.n, instance.observed, instance.samples, known, params)
    return ConditionalSolution(r["x"], r["d"], r["gen"], r["t"], r["objective"], r["r_pri"], r["r_dual"],
                               r["iters"], r["converged"], known, r["ambiguous"], r["state"], r["shift"])


def solve_dual(x_tilde_on_m, observed, n: int, params: SolverParams | None = None,
               warm_start: PrimalSolution | ConditionalSolution | None = None) -> DualSolution:
    """Maximize Re<q, x_tilde> over dual-norm-bounded q supported on the observations.

    ``||q||*_A <= 1`` is carried by a Hermitian H with ``[[H, q], [q^H, 1]] >= 0``
    and ``diagonal_sums(H) = e_0``. ``warm_start`` seeds the iteration with the
    multiplier of a solved completion problem on the same samples.
    """
    params = params or SolverParams()
    obs = _check_observed(observed, n)
    b = np.asarray(x_tilde_on_m, dtype=np.complex128)
    if b.shape != obs.shape:
        raise SolverError("x_tilde_on_m must match observed in length")
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return DualSolution(np.zeros(obs.size, dtype=complex), obs, np.eye(n, dtype=complex) / n, 0.0,
                            0.0, 0.0, 0, True)
    scale = math.sqrt(obs.size) / norm_b
    root_n = math.sqrt(n)
    rho = params.dual_rho
    if warm_start is not None and warm_start.state is not None and warm_start.state.z.shape[0] == n + 1:
        st = warm_start.state
        z0 = np.ascontiguousarray(_conj_sign(-2.0 * st.rho * st.u))
        u0 = np.ascontiguousarray(_conj_sign(st.z) * (-0.5 * scale / st.scale / rho))
    else:
        z0 = np.zeros((n + 1, n + 1), dtype=np.complex128)
        u0 = z0.copy()
    empty = np.zeros((obs.size, 0), dtype=complex)
    theta, z, u, _, rho, iters, r_pri, r_dual, conv = _run(
        _kernels.MODE_DUAL, n, obs, b * (scale / root_n), empty, empty.T.copy(), z0, u0, rho, params)
    q = theta[obs, n] / root_n
    cert = theta[:n, :n] / n
    # [[H, q], [q^H, 1]] + lam I >= 0 implies (H + lam I, q) / (1 + n lam) is exactly feasible
    q_full = np.zeros(n, dtype=complex)
    q_full[obs] = q
    lam = max(0.0, -min_eigenvalue(bordered_matrix_dense(cert, q_full, 1.0)))
    shrink = 1.0 + n * lam
    if lam > 0.0:
        cert = (cert + lam * np.eye(n)) / shrink
        q = q / shrink
    objective = float(np.real(np.vdot(q, b)))
    return DualSolution(q, obs, cert, objective, float(r_pri), float(r_dual), int(iters), bool(conv), shrink)


def residual_on_observed(sol: ConditionalSolution, instance: Instance) -> np.ndarray:
    """x_tilde + A_P d - x on the observations (zero for an exact coupling)."""
    obs = instance.observed
    rec = sol.x_tilde[obs]
    if sol.d.size:
        rec = rec + atom_matrix(sol.known_freqs, obs) @ sol.d
    return rec - instance.samples


def certificate_errors(dual: DualSolution) -> tuple[float, float]:
    """``(min eigenvalue of the bordered certificate, max |diagonal_sums(H) - e_0|)``."""
    ds = diagonal_sums(dual.certificate)
    ds[0] -= 1.0
    return min_eigenvalue(dual.bordered), float(np.max(np.abs(ds)))
