"""Bayesian regression with a recombination-aware Markov prior on marker activation."""
from __future__ import annotations

__version__ = "0.1.0"

from .baselines import bernoulli_prior_chain, lasso_cv, lasso_fit, ridge_fit, single_marker_wald
from .data import (
    Dataset,
    GenotypeMatrix,
    Hyperparameters,
    MarkerMap,
    ModelState,
    SampleTrace,
    SamplingSchedule,
    initial_state,
    validate_dataset,
)
from .evaluation import benchmark, fit_method, posterior_summary, precision_recall, rank_markers
from .gibbs import gibbs_sweep, run_chain
from .io import read_dataset, run_segmented, write_dataset
from .markov import MarkovPrior
from .simulate import SimConfig, simulate
