"""Quantum renormalization group of the 2D spin-1/2 anisotropic XY model on five-spin star blocks."""

__version__ = "0.1.0"

from .entanglement import (
    FitError,
    cg_at,
    concurrence,
    derivative_curve,
    derivative_peak,
    pairwise_concurrences,
    scaling_fits,
)
from .rg_map import (
    ProjectionError,
    effective_pair_coupling,
    eta_factors_closed,
    eta_factors_operator,
    fixed_points,
    iterate,
    rg_step,
)
from .spin_algebra import ConvergenceError, eigh_lowest, partial_trace_pair, two_site_coupling
from .xy_block import (
    Couplings,
    block_ground_data,
    build_block_hamiltonian,
    ground_energy_analytic,
    ground_states_analytic,
    verify_ground_space,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "Couplings",
    "FitError",
    "ProjectionError",
    "block_ground_data",
    "build_block_hamiltonian",
    "cg_at",
    "concurrence",
    "derivative_curve",
    "derivative_peak",
    "effective_pair_coupling",
    "eigh_lowest",
    "eta_factors_closed",
    "eta_factors_operator",
    "fixed_points",
    "ground_energy_analytic",
    "ground_states_analytic",
    "iterate",
    "pairwise_concurrences",
    "partial_trace_pair",
    "rg_step",
    "scaling_fits",
    "two_site_coupling",
    "verify_ground_space",
]
