"""Multivariate discrete copulas, stochastic arrays and ensemble copula coupling."""

from .arrays import (
    RankMatrix,
    StochasticArray,
    array_from_copula,
    check_stochastic,
    copula_from_array,
    is_permutation_array,
    mixture_array,
    permutation_array_from_rank_matrix,
    random_rank_matrix,
    random_stochastic_array,
    rank_matrix_from_permutation_array,
)
from .ecc import (
    EmpiricalMargin,
    EnsembleCopulaCoupling,
    EnsembleDataset,
    GaussianMargin,
    MarginId,
    dependence_template,
    ecc_reorder,
    marginal_samples,
    run_ecc,
    verify_copula_preservation,
)
from .empirical import EmpiricalCopula, empirical_copula, ranks, sample_set_from_rank_matrix
from .grid import (
    AxiomReport,
    GridFunction,
    box_volume,
    check_discrete_copula,
    is_irreducible,
    min_copula,
    product_copula,
)
from .sklar import DiscreteJointDistribution, StepCDF, compose, extract_copula
from .subcopula import DiscreteSubcopula, block_counts, check_subcopula, extend_irreducible, restrict

__version__ = "0.1.0"
