"""cdftlab: ground states, density-pair functionals and current sweeps.

A small numerical laboratory for one-electron magnetic Schrodinger problems
on a uniform 2D grid. It solves H(V, A) = (-i grad + A)^2 + V for its lowest
eigenpairs, extracts particle and current densities, inverts scalar
potentials from states, and evaluates the density-pair energy functionals
whose variational behaviour the counterexample driver interrogates.
"""

__version__ = "0.1.0"

from .grid import (
    Grid2D,
    ScalarField,
    VectorField,
    ComplexField,
    make_grid,
    integrate,
    inner_product,
    norm_l2,
    normalized,
    gradient,
    divergence,
    curl_z,
    laplacian,
)
from .operators import (
    PotentialPair,
    MagneticSchrodinger,
    hamiltonian,
    free_hamiltonian,
    symmetric_gauge,
    expectation,
    kinetic_free_expectation,
)
from .eigensolve import (
    EigenResult,
    GroundStateCheck,
    lowest_eigenpairs,
    verify_ground_state,
)
from .densities import (
    DensityPair,
    particle_density,
    paramagnetic_current,
    total_current,
    continuity_residual,
    density_pair_from_state,
)
from .inversion import (
    FockDarwinSpec,
    FockDarwinFamily,
    fock_darwin_family,
    fock_darwin_excited_guess,
    fock_darwin_warm_block,
    InversionResult,
    invert_scalar_potential,
    RepresentingState,
    representing_state,
    MembershipResult,
    membership_check,
)
from .functionals import (
    FunctionalReport,
    BracketDecision,
    f_hk,
    e_tilde,
    bracket_is_zero,
    bracket_decision,
    correction_term,
    e_full,
)
from .counterexample import (
    FamilyBundle,
    SweepRow,
    CounterexampleReport,
    build_family,
    make_j_eps,
    epsilon_sweep,
    default_eps_values,
)
from .fieldio import (
    read_field,
    write_scalar_field,
    write_vector_field,
)
from .exceptions import (
    CdftLabError,
    ConfigError,
    FieldFormatError,
    RepresentationError,
    InversionConsistencyError,
    ConvergenceError,
)

__all__ = [
    "__version__",
    # grid
    "Grid2D", "ScalarField", "VectorField", "ComplexField", "make_grid",
    "integrate", "inner_product", "norm_l2", "normalized", "gradient",
    "divergence", "curl_z", "laplacian",
    # operators
    "PotentialPair", "MagneticSchrodinger", "hamiltonian", "free_hamiltonian",
    "symmetric_gauge", "expectation", "kinetic_free_expectation",
    # eigensolve
    "EigenResult", "GroundStateCheck", "lowest_eigenpairs", "verify_ground_state",
    # densities
    "DensityPair", "particle_density", "paramagnetic_current", "total_current",
    "continuity_residual", "density_pair_from_state",
    # inversion
    "FockDarwinSpec", "FockDarwinFamily", "fock_darwin_family",
    "fock_darwin_excited_guess", "fock_darwin_warm_block",
    "InversionResult", "invert_scalar_potential",
    "RepresentingState", "representing_state", "MembershipResult",
    "membership_check",
    # functionals
    "FunctionalReport", "BracketDecision", "f_hk", "e_tilde", "bracket_is_zero",
    "bracket_decision", "correction_term", "e_full",
    # counterexample
    "FamilyBundle", "SweepRow", "CounterexampleReport", "build_family",
    "make_j_eps", "epsilon_sweep", "default_eps_values",
    # io
    "read_field", "write_scalar_field", "write_vector_field",
    # errors
    "CdftLabError", "ConfigError", "FieldFormatError", "RepresentationError",
    "InversionConsistencyError", "ConvergenceError",
]
