"""Off-grid line-spectrum recovery by atomic-norm SDP, with known-pole conditioning."""

from ._kernels import BACKEND
from .certificate import CaratheodoryDecomposition, DualPolynomial, caratheodory_decompose, dual_poly_eval, localize
from .linalg import diagonal_sums, least_squares, psd_project, toeplitz_expand
from .model import Instance, InstanceConfig, LineSpectrum, SpectralLine, draw_instance, synthesize, wrap_distance
from .oracle import grid_atomic_norm, grid_basis_pursuit
from .recovery import RecoveryResult, ScoringTolerances, recover, score, solve_coefficients
from .sdp import SolverParams, solve_conditional, solve_dual, solve_primal

__version__ = "0.1.0"
