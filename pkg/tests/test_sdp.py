import numpy as np
import pytest

from specrecover.linalg import diagonal_sums, min_eigenvalue, psd_project
from specrecover.model import (InstanceConfig, LineSpectrum, SpectralLine, atom_matrix, draw_instance,
                               make_instance, nominal_separation)
from specrecover.sdp import (SolverError, SolverParams, certificate_errors, residual_on_observed,
                             solve_conditional, solve_dual, solve_primal)


def _instance(seed, trial=0, n=32, m=9, s=4, p=0):
    return draw_instance(InstanceConfig(n, m, s, p, nominal_separation(n), master_seed=seed), trial)


def test_params_validation():
    for kw in [dict(rho=0), dict(eps_abs=0.1), dict(over_relaxation=2.0), dict(max_iters=0)]:
        with pytest.raises(ValueError):
            SolverParams(**kw)


def test_single_atom_full_observation_norm_is_amplitude():
    inst = make_instance(16, range(16), [SpectralLine(0.3137, 2.0, 1.1)])
    sol = solve_primal(inst)
    assert sol.converged
    assert sol.objective == pytest.approx(2.0, abs=1e-3)


def test_zero_signal():
    inst = make_instance(8, [1, 4, 6], [])
    sol = solve_primal(inst)
    assert sol.objective == 0.0 and sol.t == 0.0 and not np.any(sol.x_hat)
    dual = solve_dual(np.zeros(3), [1, 4, 6], 8)
    assert dual.objective == 0.0


def test_no_observations_is_an_error():
    with pytest.raises(SolverError):
        solve_dual(np.zeros(0), [], 8)


@pytest.mark.parametrize("seed", range(4))
def test_primal_invariants(seed):
    inst = _instance(seed)
    sol = solve_primal(inst)
    assert sol.converged
    z = sol.bordered
    assert min_eigenvalue(z) >= -1e-6 * (1 + sol.t)
    assert np.max(np.abs(sol.x_hat[inst.observed] - inst.samples)) <= 1e-9
    assert np.linalg.norm(psd_project(z) - z) <= 1e-5 * np.linalg.norm(z)
    # objective and its two halves agree
    assert sol.objective == pytest.approx(0.5 * (sol.toeplitz[0].real + sol.t))


@pytest.mark.parametrize("seed", range(4))
def test_conditional_coupling_and_reduction(seed):
    inst = _instance(seed)
    prim = solve_primal(inst)
    cond0 = solve_conditional(inst.with_known(0))
    assert abs(prim.objective - cond0.objective) <= 1e-5
    assert np.array_equal(prim.x_hat, cond0.x_tilde)
    cond = solve_conditional(inst.with_known(2))
    assert np.max(np.abs(residual_on_observed(cond, inst.with_known(2)))) <= 1e-9
    assert cond.d.shape == (2,)
    # conditioning can only lower the norm
    assert cond.objective <= prim.objective + 1e-4


def test_all_known_recovers_coefficients():
    inst = _instance(3, s=4, p=4)
    cond = solve_conditional(inst)
    truth = inst.truth.coefficients
    assert not cond.ambiguous
    assert np.max(np.abs(cond.x_tilde)) <= 1e-10
    # the Toeplitz block decays to zero only at the solver's tolerance
    assert cond.objective <= 1e-3
    assert np.max(np.abs(cond.d - truth) / np.abs(truth)) <= 1e-4


def test_rank_deficient_known_atoms_flagged():
    lines = [SpectralLine(f, 1.0, 0.0) for f in (0.1, 0.3, 0.55)]
    inst = make_instance(16, [0, 5], LineSpectrum(tuple(lines)).with_known_prefix(3))
    cond = solve_conditional(inst)
    assert cond.ambiguous
    a = atom_matrix(inst.known_freqs, inst.observed)
    assert np.allclose(cond.d, np.linalg.pinv(a) @ inst.samples, atol=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_dual_invariants_and_strong_duality(seed):
    inst = _instance(seed)
    prim = solve_primal(inst)
    for warm in (prim, None):
        dual = solve_dual(inst.samples, inst.observed, inst.n, warm_start=warm)
        assert dual.converged
        eig, trace_err = certificate_errors(dual)
        assert eig >= -1e-6
        assert trace_err <= 1e-6
        assert abs(prim.objective - dual.objective) <= 1e-3 * (1 + abs(prim.objective))
        assert np.count_nonzero(dual.q_full) <= inst.m


def test_dual_trace_conditions_shape():
    inst = _instance(0)
    dual = solve_dual(inst.samples, inst.observed, inst.n)
    ds = diagonal_sums(dual.certificate)
    assert ds[0] == pytest.approx(1.0, abs=1e-5)


def test_nonconvergence_is_flagged_not_hidden():
    inst = _instance(1)
    sol = solve_primal(inst, SolverParams(max_iters=3))
    assert not sol.converged
    assert sol.iterations == 3
    assert np.isfinite(sol.objective)
