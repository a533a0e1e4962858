"""Bayesian clustering of distance matrices with medoid (Voronoi) priors."""

from .core import (
    DistanceMatrix,
    MedoidSet,
    MultiViewData,
    Partition,
    induce_nested_partition,
    induce_partition,
    read_distance,
    validate_distance_matrix,
)
from .likelihood import LikelihoodConfig, Mode, loglik
from .priors import AlphaPriorConfig, MedoidPriorConfig, PYConfig
from .samplers import (
    ChainConfig,
    ExplicitInit,
    PamInit,
    RandomInit,
    run_bdm,
    run_gibbs_indicators,
    run_joint,
    run_nested,
    run_py_dependent,
    run_py_independent,
)
from .trace import TraceSet

__version__ = "0.1.0"

__all__ = [
    "AlphaPriorConfig", "ChainConfig", "DistanceMatrix", "ExplicitInit",
    "LikelihoodConfig", "MedoidPriorConfig", "MedoidSet", "Mode", "MultiViewData",
    "PYConfig", "PamInit", "Partition", "RandomInit", "TraceSet",
    "induce_nested_partition", "induce_partition", "loglik", "read_distance",
    "run_bdm", "run_gibbs_indicators", "run_joint", "run_nested",
    "run_py_dependent", "run_py_independent", "validate_distance_matrix",
]
