"""Model-agnostic symbolic explanation engine.

Granulates numeric features into ordered fuzzy linguistic terms, compiles any
classifier's predictions into a confidence-scored symbolic rule base, and
answers what-if and counterfactual queries over it -- through a library API,
a CLI, an HTTP service, and a natural-language front end.
"""

from .dataset import Dataset, FeatureSpec, SplitConfig, impute, normalize, parse_arff, split
from .granulation import (
    FcmConfig,
    FeatureGranulation,
    SymbolAssignment,
    assign_symbol,
    default_terms,
    fit_fcm,
    granulate_dataset,
)
from .prediction import Prediction, accuracy, baseline_classify, ingest_predictions
from .queries import Query, QueryConstraints, QueryResult, closest_rule, resolve
from .rulebase import (
    FuzzyRule,
    KnowledgeBase,
    build_rules,
    export_prolog,
    parse_prolog_kb,
)
from .scoring import (
    RegionMembership,
    ScoringConfig,
    bias_proxy,
    complexity,
    implicator,
    score_rules,
    top_rules,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FeatureSpec", "SplitConfig", "parse_arff", "impute",
    "normalize", "split",
    "FcmConfig", "FeatureGranulation", "SymbolAssignment", "fit_fcm",
    "assign_symbol", "default_terms", "granulate_dataset",
    "Prediction", "ingest_predictions", "baseline_classify", "accuracy",
    "FuzzyRule", "KnowledgeBase", "build_rules", "export_prolog",
    "parse_prolog_kb",
    "ScoringConfig", "RegionMembership", "implicator", "score_rules",
    "complexity", "top_rules", "bias_proxy",
    "Query", "QueryConstraints", "QueryResult", "resolve", "closest_rule",
    "__version__",
]
