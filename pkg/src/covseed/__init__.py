"""Covariant measurement seeds: extremality, decomposition, optimization.

A covariant measurement is generated by one operator, its seed, moved
around by a unitary group representation.  This package decides whether a
seed is an extremal point of the convex set of valid seeds, decomposes
representations into isotypic form, and maximizes likelihood-type figures
of merit over the seed set with uniqueness and stability certificates.
"""

from .covariant import (
    ConstraintReport,
    Seed,
    SeedBlocks,
    block_form,
    born_probability,
    check_seed,
    povm_density,
    seed_from_blocks,
)
from .extremality import (
    ConvexSplit,
    ExtremalityCertificate,
    PerturbationSpace,
    RankBoundReport,
    convex_split,
    is_extremal,
    lemma_feasibility,
    minimal_support_check,
    perturbation_space,
    rank_bounds,
)
from .grouprep import (
    DecompositionError,
    GroupModel,
    IntertwinerReport,
    IsotypicClass,
    IsotypicDecomposition,
    commutant_basis,
    frame_operator,
    intertwiner_check,
    isotypic_decompose,
    twirl,
)
from .numerics import DEFAULT_RNG_SEED, DEFAULT_TOL
from .optimize import (
    ConvergenceError,
    FigureOfMerit,
    OptimizationResult,
    average_figure_of_merit,
    likelihood,
    merit_normalization,
    ml_map,
    optimize_likelihood,
    project_to_seed_set,
    stability_threshold,
    unique_optimum_certificate,
)
from .scenarios import (
    Scenario,
    build_scenario,
    build_seed,
    correlation_matrix_to_seed,
    cyclic,
    decomposition_pair,
    random_seed,
    rank_one_seed,
    seed_to_correlation_matrix,
    spin_j,
    su_d_tensor2,
    u1_phase,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DEFAULT_RNG_SEED",
    "DEFAULT_TOL",
    "GroupModel",
    "IsotypicClass",
    "IsotypicDecomposition",
    "IntertwinerReport",
    "DecompositionError",
    "isotypic_decompose",
    "commutant_basis",
    "intertwiner_check",
    "twirl",
    "frame_operator",
    "Seed",
    "ConstraintReport",
    "SeedBlocks",
    "check_seed",
    "block_form",
    "seed_from_blocks",
    "povm_density",
    "born_probability",
    "ExtremalityCertificate",
    "PerturbationSpace",
    "RankBoundReport",
    "ConvexSplit",
    "is_extremal",
    "perturbation_space",
    "minimal_support_check",
    "lemma_feasibility",
    "convex_split",
    "rank_bounds",
    "FigureOfMerit",
    "OptimizationResult",
    "ConvergenceError",
    "likelihood",
    "ml_map",
    "merit_normalization",
    "average_figure_of_merit",
    "optimize_likelihood",
    "project_to_seed_set",
    "unique_optimum_certificate",
    "stability_threshold",
    "Scenario",
    "spin_j",
    "su_d_tensor2",
    "u1_phase",
    "cyclic",
    "build_scenario",
    "decomposition_pair",
    "build_seed",
    "random_seed",
    "rank_one_seed",
    "correlation_matrix_to_seed",
    "seed_to_correlation_matrix",
]
