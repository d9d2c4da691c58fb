"""First-passage random walks on the probability simplex.

A measured superposition is mapped to a point on the simplex spanned by the
outcome weights |a_i|^2; measurement is modeled as an unbiased random walk
of that point, absorbing at the vertices. Martingale structure makes the
absorption probabilities equal the starting coordinates, i.e. the Born
rule, and the package verifies this three independent ways: exact linear
algebra on the discrete chips game, Laplace-domain Green's functions with
numerically inverted passage-time densities, and seeded Monte Carlo.
"""

from .analytic import (
    DiffusionParams,
    DomainError,
    InversionUnstableError,
    NGreenParams,
    fpp_2state,
    fpp_nstate,
    fpt_cdf_2state,
    fpt_density_2state,
    green_2state,
    green_nstate,
    invert_laplace,
    mfpt_2state,
    nstate_vertex_fluxes,
    nstate_vertex_fluxes_numeric,
    passage_flux_transform,
    stehfest_weights,
    wall_flux_2state,
)
from .runner import run_trials
from .state import (
    CompoundState,
    DimensionTooSmallError,
    ImageMismatchError,
    ImageState,
    QuantumState,
    ZeroVectorError,
    bind_compound,
    form_image,
    make_state,
    walk_seed,
)
from .stats import (
    BornComparison,
    DimensionMismatchError,
    EnsembleStats,
    MfptComparison,
    NoCompletedTrialsError,
    accumulate,
    compare_born,
    compare_mfpt,
    merge,
    passage_moments,
)
from .walk import (
    InvalidStartError,
    NotChipRepresentableError,
    SimplexPoint,
    WalkConfig,
    WalkOutcome,
    derive_trial_seed,
    run_continuum_walk,
    run_discrete_game,
)

__version__ = "0.1.0"

__all__ = [
    "QuantumState",
    "ImageState",
    "CompoundState",
    "make_state",
    "form_image",
    "bind_compound",
    "walk_seed",
    "ZeroVectorError",
    "DimensionTooSmallError",
    "ImageMismatchError",
    "SimplexPoint",
    "WalkConfig",
    "WalkOutcome",
    "derive_trial_seed",
    "run_discrete_game",
    "run_continuum_walk",
    "InvalidStartError",
    "NotChipRepresentableError",
    "DiffusionParams",
    "NGreenParams",
    "green_2state",
    "green_nstate",
    "fpp_2state",
    "fpp_nstate",
    "wall_flux_2state",
    "nstate_vertex_fluxes",
    "nstate_vertex_fluxes_numeric",
    "mfpt_2state",
    "passage_flux_transform",
    "stehfest_weights",
    "invert_laplace",
    "fpt_density_2state",
    "fpt_cdf_2state",
    "DomainError",
    "InversionUnstableError",
    "EnsembleStats",
    "BornComparison",
    "MfptComparison",
    "accumulate",
    "merge",
    "compare_born",
    "compare_mfpt",
    "passage_moments",
    "DimensionMismatchError",
    "NoCompletedTrialsError",
    "run_trials",
]
