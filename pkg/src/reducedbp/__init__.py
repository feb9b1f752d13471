"""Critical Markov branching processes with very heavy-tailed offspring.

Offspring laws, analytic generating-function oracles, a genealogy-recording
simulator, samplers for the limit genealogies, Lambda-coalescent merger laws
and an experiment harness.
"""

from .analytic import AnalyticModel, F_closed, LimitLaws, f_series, limit_cdfs
from .coalescent import CoalescentSpec, merger_rate, next_merger_law, verify_link
from .errors import BudgetError, DomainError, NumericalError, ParameterError, SamplingError, StatisticsError
from .limit_process import (
    LimitConfig,
    LimitTree,
    sample_limit_tree,
    sample_marginal,
    sample_tau,
    trajectory_at,
    tree_block,
)
from .offspring import (
    LawKind,
    OffspringLaw,
    alpha_limit_law,
    binary_law,
    build_heavy_tail,
    pmf_alpha,
    point_mass,
    sibuya_law,
    sibuya_pmf,
    table_law,
    zero_limit_law,
)
from .rng import DEFAULT_SEED, stream
from .simulator import (
    Genealogy,
    ReducedTrajectory,
    SimConfig,
    SimOutcome,
    mrca_sample,
    reduce,
    run_block,
    simulate,
    simulate_replicate,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticModel",
    "BudgetError",
    "CoalescentSpec",
    "DEFAULT_SEED",
    "DomainError",
    "F_closed",
    "Genealogy",
    "LawKind",
    "LimitConfig",
    "LimitLaws",
    "LimitTree",
    "NumericalError",
    "OffspringLaw",
    "ParameterError",
    "ReducedTrajectory",
    "SamplingError",
    "SimConfig",
    "SimOutcome",
    "StatisticsError",
    "alpha_limit_law",
    "binary_law",
    "build_heavy_tail",
    "f_series",
    "limit_cdfs",
    "merger_rate",
    "mrca_sample",
    "next_merger_law",
    "pmf_alpha",
    "point_mass",
    "reduce",
    "run_block",
    "sample_limit_tree",
    "sample_marginal",
    "sample_tau",
    "sibuya_law",
    "sibuya_pmf",
    "simulate",
    "simulate_replicate",
    "stream",
    "table_law",
    "trajectory_at",
    "tree_block",
    "verify_link",
    "zero_limit_law",
]
