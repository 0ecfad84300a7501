"""Steady-state spectroscopy of a driven, damped anharmonic quantum oscillator.

The model is a single bosonic mode with a Kerr-type quartic nonlinearity,
coherently driven and damped by single-photon loss.  In the frame rotating
at the drive frequency the Hamiltonian is

    H = delta * a'a + chi * a'a'aa + epsilon * (a + a')

and the density matrix relaxes under a zero-temperature Lindblad equation
with decay rate gamma.  The package computes the driven steady state and
its spectroscopic response along several independent routes (sparse
superoperator algebra, a closed-form hypergeometric expression, a
perturbative series) together with phase-space, metastability, and
semiclassical diagnostics, and exposes a deterministic sweep CLI.
"""

from .fock import (
    ModelParams,
    annihilation,
    creation,
    number_operator,
    fock_state,
    fock_projector,
    build_hamiltonian,
    expectation,
    von_neumann_entropy,
    binary_entropy,
    validate_density_matrix,
)
from .lindblad import (
    build_superoperator,
    steady_state,
    solve_steady_state_adaptive,
    low_lying_spectrum,
    metastable_extremes,
    SpectrumSlice,
    MetastablePair,
)
from .closedform import hyper_0f2, dw_response, dw_response_grid
from .semiclassical import (
    classical_steady_states,
    bifurcation_boundary,
    bistability_cusp,
    ClassicalBranches,
    BifurcationBoundary,
)
from .phasespace import (
    WignerGrid,
    displacement_operator,
    local_maxima,
    wigner,
    wigner_integral,
    wigner_many,
    wigner_purity,
)
from .perturbation import (
    s0_eigenvalue,
    s0_eigenpair,
    s0_eigensystem,
    verify_s0_eigenpair,
    bw_steady_state,
    response_series,
    fano_q,
    fano_fit,
    onset_scan,
    onset_slope,
    S0Eigenpair,
    FanoFit,
)
from .circuit import CircuitParams, load_circuit, to_model, v2_signal, V2Quadratures

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "annihilation",
    "creation",
    "number_operator",
    "fock_state",
    "fock_projector",
    "build_hamiltonian",
    "expectation",
    "von_neumann_entropy",
    "binary_entropy",
    "validate_density_matrix",
    "build_superoperator",
    "steady_state",
    "solve_steady_state_adaptive",
    "low_lying_spectrum",
    "metastable_extremes",
    "SpectrumSlice",
    "MetastablePair",
    "hyper_0f2",
    "dw_response",
    "dw_response_grid",
    "classical_steady_states",
    "bifurcation_boundary",
    "bistability_cusp",
    "ClassicalBranches",
    "BifurcationBoundary",
    "displacement_operator",
    "wigner",
    "wigner_many",
    "wigner_integral",
    "wigner_purity",
    "local_maxima",
    "WignerGrid",
    "s0_eigenvalue",
    "s0_eigenpair",
    "s0_eigensystem",
    "verify_s0_eigenpair",
    "bw_steady_state",
    "response_series",
    "fano_q",
    "fano_fit",
    "onset_scan",
    "onset_slope",
    "S0Eigenpair",
    "FanoFit",
    "CircuitParams",
    "load_circuit",
    "to_model",
    "v2_signal",
    "V2Quadratures",
    "__version__",
]
