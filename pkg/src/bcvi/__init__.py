"""Bayesian cluster validity index.

Cluster with K-means or fuzzy c-means over a range of cluster counts, score
each count with a validity index, and turn the scores into a Dirichlet or
generalized Dirichlet posterior over the number of clusters.
"""

from .bayes import (
    BcviResult,
    DirichletPrior,
    GDPrior,
    RatioVector,
    bcvi_rank,
    compute_ratios,
    dirichlet_posterior,
    gd_moment,
    gd_posterior,
    profile_alpha,
)
from .clustering import HardClustering, RunOptions, SoftClustering, best_of_restarts, fcm_once, kmeans_once
from .cvi_hard import CviSeries, Direction, db_value, str_series, wi_series
from .cvi_soft import FuzzyRepresentativeConfig, kwon2_value, wp_series, xb_value
from .datasets import Dataset, MixtureComponent, MixtureSpec, clustering_accuracy, generate_mixture, load_csv
from .paircorr import baseline_dispersion, pair_distance_correlation
from .pipeline import PipelineConfig, ReportBundle, emit_plot_data, run_pipeline

__version__ = "0.1.0"
