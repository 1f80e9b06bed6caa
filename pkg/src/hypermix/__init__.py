"""Overlapping community detection in hypergraphs with node attributes.

Hyperedges are modeled as Poisson counts driven by pairwise bilinear
community affinities; binary node attributes are Bernoulli draws tied to
the same memberships.  Fitting blends the two log-likelihoods with a
weight gamma and runs closed-form EM updates under box and simplex
constraints.
"""

from ._kernels import active_backend, available_backends, set_backend
from .em import FitConfig, FitResult, em_fit, em_iteration
from .errors import NumericalError, ValidationError
from .evaluation import (
    AucResult,
    CVGrid,
    EvalReport,
    auc_from_scores,
    auc_prediction,
    cosine_similarity,
    kfold_cv,
    soo_negatives,
)
from .hypergraph import (
    AttributeMatrix,
    Hypergraph,
    IncidenceIndex,
    build_hypergraph,
    delete_random_edges,
    incidence_index,
    one_hot_encode,
)
from .model import (
    Hyperparams,
    ModelParams,
    StructuralConstants,
    attribute_prob,
    budget_constant,
    edge_intensity,
    kappa,
    log_kappa,
    loglik_attributes,
    loglik_structure,
    total_loglik,
)
from .synth import GenConfig, generate_attributes, generate_hypergraph

__version__ = "0.1.0"

__all__ = [
    "AttributeMatrix", "AucResult", "CVGrid", "EvalReport", "FitConfig",
    "FitResult", "GenConfig", "Hypergraph", "Hyperparams", "IncidenceIndex",
    "ModelParams", "NumericalError", "StructuralConstants", "ValidationError",
    "active_backend", "attribute_prob", "auc_from_scores", "auc_prediction",
    "available_backends", "budget_constant", "build_hypergraph",
    "cosine_similarity", "delete_random_edges", "edge_intensity", "em_fit",
    "em_iteration", "generate_attributes", "generate_hypergraph",
    "incidence_index", "kappa", "kfold_cv", "log_kappa", "loglik_attributes",
    "loglik_structure", "one_hot_encode", "set_backend", "soo_negatives",
    "total_loglik", "__version__",
]
