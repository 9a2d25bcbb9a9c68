"""Lexical classification of domain names.

The pipeline reduces a hostname to its registrable core with the public
suffix list, segments the core into words, maps it to sparse binary
features and scores it with an L1-penalized logistic regression.
"""

from .analyzer import DomainAnalyzer, InvalidDomain
from .features import FeatureInput, FeatureSpace, design_matrix, fit_feature_space, vectorize
from .harness import HostScorer, build_experiment, ingest, report_coefficients, run_matrix, train_model
from .lasso import LassoModel, cross_validate, fit_path
from .metrics import auc, mcr, roc_curve
from .modelio import load_model, save_model
from .psl import DomainName, effective_2ld, parse_psl
from .segmenter import Segmenter, segment

__version__ = "0.1.0"

__all__ = [
    "DomainAnalyzer",
    "InvalidDomain",
    "FeatureInput",
    "FeatureSpace",
    "design_matrix",
    "fit_feature_space",
    "vectorize",
    "HostScorer",
    "build_experiment",
    "ingest",
    "report_coefficients",
    "run_matrix",
    "train_model",
    "LassoModel",
    "cross_validate",
    "fit_path",
    "auc",
    "mcr",
    "roc_curve",
    "load_model",
    "save_model",
    "DomainName",
    "effective_2ld",
    "parse_psl",
    "Segmenter",
    "segment",
]
