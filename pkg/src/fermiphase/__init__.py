"""Phase-space diagnostics for trapped fermion ground states.

Builds Slater-determinant states in traps, computes Wigner and Husimi
representations (including two-particle variants), solves the Thomas-Fermi
variational problem, and verifies the exact identities and convergence
trends connecting them across sweeps of the particle number.
"""

from .grids import (
    GridFunction,
    PhaseSpaceGrid,
    SpatialGrid,
    dump_grid_function,
    fourier_phase,
    integrate,
    inverse_fourier_phase,
    load_grid_function,
    make_phase_grid,
)
from .orbitals import (
    InteractionSpec,
    SlaterState,
    TrapSpec,
    hermite_basis,
    recommended_spatial_n,
    scf_slater,
    slater_energy,
    solve_trap,
)
from .density import (
    DensityKernel,
    KParticleDensity,
    density_from_gamma,
    gamma1,
    gamma_k_hs_sq,
    gamma_k_kernel,
    moment_trace,
)
from .wigner import (
    KPhaseFunction,
    WeylPoint,
    groenewold,
    laguerre_oracle,
    weyl_apply,
    wigner_k,
    wigner_transform,
)
from .husimi import MollifierSpec, husimi_k, mollify
from .thomas_fermi import (
    ClassicalState,
    TFSolution,
    classical_state,
    classical_state_spectrum,
    ctf,
    tf_energy,
    tf_solve,
    vlasov_energy,
)
from .norms import (
    commutator_identity_check,
    holder_seminorm_gaussian,
    lp_norm,
    sobolev_norm,
    translation_modulus,
)
from .diagnostics import (
    ConvergenceReport,
    RunConfig,
    converge_suite,
    corollary2_diagnostic,
    energy_suite,
    moments_diagnostic,
    theorem3_suite,
    write_report,
)

__version__ = "0.1.0"
