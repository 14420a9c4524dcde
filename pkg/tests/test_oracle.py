import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specrecover.model import SpectralLine, atom_eval, make_instance
from specrecover.oracle import grid_atomic_norm, grid_basis_pursuit, soft_threshold
from specrecover.sdp import solve_primal


def test_soft_threshold():
    v = np.array([3 + 4j, 0.5, 0])
    out = soft_threshold(v, 1.0)
    assert np.allclose(out, [(3 + 4j) * 0.8, 0, 0])


def test_on_grid_atom():
    g = 256
    x = 2.0 * atom_eval(64 / g, 0.7, np.arange(32))
    res = grid_basis_pursuit(x, np.arange(32), g, tol=1e-6)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-4)
    assert res.lower_bound <= res.value


def test_zero_signal():
    assert grid_atomic_norm(np.zeros(4), [0, 1, 2, 3], 64) == 0.0


def test_input_validation():
    with pytest.raises(ValueError):
        grid_atomic_norm(np.ones(3), [0, 1], 64)
    with pytest.raises(ValueError):
        grid_atomic_norm(np.ones(2), [0, 70], 64)


def test_bracket_is_certified():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    res = grid_basis_pursuit(x, np.arange(12), 128, tol=1e-6)
    assert res.converged
    assert res.value - res.lower_bound <= 1e-6 * res.value + 1e-12
    # the returned coefficients reproduce the samples
    synth = np.exp(2j * np.pi * np.outer(np.arange(12), np.arange(128)) / 128) @ res.coefficients
    assert np.allclose(synth, x, atol=1e-8)
    assert np.sum(np.abs(res.coefficients)) == pytest.approx(res.value, rel=1e-9)


@settings(max_examples=15)
@given(st.integers(0, 2 ** 32 - 1))
def test_refining_the_grid_never_hurts(seed):
    rng = np.random.default_rng(seed)
    n = 8
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    coarse = grid_basis_pursuit(x, np.arange(n), 32, tol=1e-9)
    fine = grid_basis_pursuit(x, np.arange(n), 64, tol=1e-9)
    assert fine.value <= coarse.value + 1e-6
    assert fine.value >= np.max(np.abs(x)) - 1e-6


def test_matches_sdp_off_grid():
    inst = make_instance(32, range(32), [SpectralLine(0.1234, 1.0, 0.3), SpectralLine(0.5678, 1.7, 2.0)])
    sdp = solve_primal(inst).objective
    grid = grid_atomic_norm(inst.samples, inst.observed, 2 ** 13)
    assert abs(grid - sdp) <= 1e-2 * sdp
