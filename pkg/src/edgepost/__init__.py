"""Exact posterior probabilities of Bayesian network edges from complete discrete data."""
from .engine import edge_posteriors
from .estimator import EdgePosteriorEstimator
from .exceptions import (
    CapExceededError,
    DatasetParseError,
    DimensionMismatchError,
    EdgePostError,
    ScoreOverflowError,
)
from .model import Dataset, PriorSpec, compute_beta, load_dataset, local_marginal_likelihood
from .oracle import brute_marginal, brute_posteriors
from .results import EdgePosteriors

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "Dataset",
    "DatasetParseError",
    "DimensionMismatchError",
    "EdgePostError",
    "EdgePosteriorEstimator",
    "EdgePosteriors",
    "PriorSpec",
    "ScoreOverflowError",
    "brute_marginal",
    "brute_posteriors",
    "compute_beta",
    "edge_posteriors",
    "load_dataset",
    "local_marginal_likelihood",
]
