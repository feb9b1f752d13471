"""Experiment orchestration, statistics and reports."""

from .experiments import EXPERIMENTS, ExperimentReport, ExperimentSpec, Verdict, rerun, run
from .stats import (
    binomial_ci,
    binomial_z,
    chi_square,
    chi_square_two_sample,
    discrete_chi_square,
    ks_distance,
    tv_distance,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentReport",
    "ExperimentSpec",
    "Verdict",
    "binomial_ci",
    "binomial_z",
    "chi_square",
    "chi_square_two_sample",
    "discrete_chi_square",
    "ks_distance",
    "rerun",
    "run",
    "tv_distance",
]
