"""Parametrically driven Dicke model of oscillating photodetectors in a
damped cavity: photon production from vacuum via four cross-validating
solvers (laboratory-frame time-dependent, permutation-symmetric resonant,
five-moment cumulant closures, and the bosonic pair-amplifier limit)."""

__version__ = "0.1.0"

from .params import (                                        # noqa: F401
    DerivedCouplings,
    PhysicalParams,
    critical_number,
    derive_couplings,
    unruh_temperature,
)
from .operators import (                                     # noqa: F401
    BlockDensityMatrix,
    build_dicke_ops,
    build_fock_ops,
    build_pauli_ops,
    degeneracy,
    dicke_j_values,
    project_to_blocks,
)
from .dynamics import (                                      # noqa: F401
    LindbladSpec,
    TrajectoryRecord,
    evolve,
    hamiltonian_full,
    hamiltonian_rwa,
    local_dissipator_blocks,
)
from .cumulant import (                                      # noqa: F401
    MomentParams,
    MomentState,
    integrate_moments,
    integrate_to_steady,
    moment_rhs,
    steady_state_fourth,
    steady_state_third,
)
from .hp_model import (                                      # noqa: F401
    GaussianState,
    hp_dynamics,
    hp_steady_state,
    threshold_ratio,
)
from .observables import (                                   # noqa: F401
    BurstSummary,
    burst_summary,
    fano,
    log_negativity,
    photon_number,
    reduced_cavity,
    scaling_fit,
    wigner,
    wigner_at,
)
