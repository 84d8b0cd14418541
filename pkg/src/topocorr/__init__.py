"""Steady-state topological diagnostics of driven-dissipative bosonic chains.

The package builds quadratic-Liouvillian chain models, decomposes the
frequency-domain response through the singular value decomposition of the
non-Hermitian dynamical matrix, and derives from it winding-number arrays,
frequency-resolved and equal-time two-point correlations, long-range-order
diagnostics, disorder ensembles, and closed-form edge-mode oracles for the
symmetric chain.
"""

from .models import (
    CouplingSet,
    DisorderRealization,
    DynamicalMatrix,
    ModelIParams,
    ModelIIParams,
    UnstableSystemError,
    adiabatic_eliminate,
    apply_disorder,
    assert_stable,
    bloch_matrix,
    build_model_i,
    build_model_ii_full,
    dynamical_matrix,
    gaussian_disorder,
    is_dynamically_stable,
    pbc_dynamical_matrix,
)
from .greensvd import (
    GreenFunction,
    ResonanceError,
    SvdTriple,
    amplification_matrix,
    green_function,
    hermitize,
    r_parameter,
    singular_gap,
    svd_at,
)
from .topology import (
    GapClosingError,
    WindingArray,
    count_edge_modes_obc,
    deformation_gap_bound,
    topologically_equivalent,
    winding_array,
    winding_number,
)
from .correlations import (
    DecayFit,
    EqualTimeCorrelations,
    FreqCorrelations,
    QuadratureSpec,
    classify_decay,
    equal_time,
    freq_correlations,
    lro_curvature,
    lro_parameter,
    rank1_approximation,
)
from .disorder import (
    DisorderSweepResult,
    EffectiveParams,
    born_self_energy,
    critical_disorder,
    disorder_sweep,
    effective_parameters,
    splitmix64,
)
from .analytics import (
    EdgeSolution,
    PhaseRegion,
    characteristic_beta_roots,
    edge_solution,
    gaussian_prediction,
    linearized_dispersion,
    phase_region,
    zero_singular_value,
)

__version__ = "0.1.0"

__all__ = [
    "CouplingSet",
    "DisorderRealization",
    "DynamicalMatrix",
    "ModelIParams",
    "ModelIIParams",
    "UnstableSystemError",
    "adiabatic_eliminate",
    "apply_disorder",
    "assert_stable",
    "bloch_matrix",
    "build_model_i",
    "build_model_ii_full",
    "dynamical_matrix",
    "gaussian_disorder",
    "is_dynamically_stable",
    "pbc_dynamical_matrix",
    "GreenFunction",
    "ResonanceError",
    "SvdTriple",
    "amplification_matrix",
    "green_function",
    "hermitize",
    "r_parameter",
    "singular_gap",
    "svd_at",
    "GapClosingError",
    "WindingArray",
    "count_edge_modes_obc",
    "deformation_gap_bound",
    "topologically_equivalent",
    "winding_array",
    "winding_number",
    "DecayFit",
    "EqualTimeCorrelations",
    "FreqCorrelations",
    "QuadratureSpec",
    "classify_decay",
    "equal_time",
    "freq_correlations",
    "lro_curvature",
    "lro_parameter",
    "rank1_approximation",
    "DisorderSweepResult",
    "EffectiveParams",
    "born_self_energy",
    "critical_disorder",
    "disorder_sweep",
    "effective_parameters",
    "splitmix64",
    "EdgeSolution",
    "PhaseRegion",
    "characteristic_beta_roots",
    "edge_solution",
    "gaussian_prediction",
    "linearized_dispersion",
    "phase_region",
    "zero_singular_value",
]
