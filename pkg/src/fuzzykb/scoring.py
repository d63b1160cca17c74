"""Rule confidence via fuzzy-rough lower approximations.

A rule's confidence is its membership in the lower approximation of its own
class region: the outer minimum of the rule's class confidence and, over every
rule in the base, the implication "similar to me implies my class". Similarity
decays exponentially with a symbol-wise rule distance; the implication is one
of four pluggable implicators. Scoring a base of n rules costs O(F * n^2) and
can run per decision class in parallel; here it is vectorized instead.

The double minimum intentionally includes the rule itself: self-similarity is
not assumed to be 1 (under the membership-aware distance a rule is only as
similar to itself as its weakest symbol allows).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, EngineWarning, ValidationError
from .granulation import SymbolAssignment
from .rulebase import FuzzyRule, KnowledgeBase

IMPLICATORS = ("fodor", "goguen", "godel", "lukasiewicz")
DISTANCES = ("crisp", "fuzzy")

_BIAS_EPS = 1e-12


@dataclass(frozen=True)
class ScoringConfig:
    """Scoring knobs: implicator name, symbol distance variant, and the
    exponential decay rate (the ``lambda`` key in config files)."""

    implicator: str = "lukasiewicz"
    distance: str = "fuzzy"
    smoothing: float = 1.0

    def __post_init__(self):
        if self.implicator not in IMPLICATORS:
            raise ConfigError(f"unknown implicator {self.implicator!r}")
        if self.distance not in DISTANCES:
            raise ConfigError(f"unknown distance {self.distance!r}")
        if self.smoothing <= 0.0:
            raise ConfigError("smoothing (lambda) must be positive")


@dataclass(frozen=True)
class RegionMembership:
    rule_id: int
    class_label: str
    lower_membership: float


def implicator(name: str, a: float, b: float) -> float:
    """Evaluate one fuzzy implication I(a, b) on [0,1]^2."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise DomainError(f"implicator inputs must lie in [0, 1]: ({a}, {b})")
    if name == "lukasiewicz":
        return min(1.0, (1.0 - a) + b)
    if a <= b:
        return 1.0
    if name == "fodor":
        return max(1.0 - a, b)
    if name == "godel":
        return b
    if name == "goguen":
        # a > b >= 0 here, so a > 0 and the quotient is safe.
        return b / a
    raise ConfigError(f"unknown implicator {name!r}")


def _implicator_matrix(name: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if name == "lukasiewicz":
        return np.minimum(1.0, (1.0 - a) + b)
    if name == "fodor":
        return np.where(a <= b, 1.0, np.maximum(1.0 - a, b))
    if name == "godel":
        return np.where(a <= b, 1.0, b)
    if name == "goguen":
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = b / a
        return np.where(a <= b, 1.0, quot)
    raise ConfigError(f"unknown implicator {name!r}")


def class_membership(rule: FuzzyRule, class_label: str,
                     class_domain: tuple[str, ...] | None = None) -> float:
    """Degree to which a rule belongs to a class region: its prediction
    confidence for its own class, zero for any other class."""
    if class_domain is not None and class_label not in class_domain:
        raise DomainError(f"unknown class {class_label!r}")
    return rule.class_confidence if rule.class_label == class_label else 0.0


def feature_distance(x: SymbolAssignment, y: SymbolAssignment,
                     variant: str = "fuzzy") -> float:
    """Symbol-wise dissimilarity.

    Crisp: 0 on matching terms, 1 otherwise. Fuzzy: matching terms contribute
    0.5 * (1 - min of the two memberships), capping the same-term penalty at
    0.5; mismatched terms still count 1.
    """
    if variant not in DISTANCES:
        raise ConfigError(f"unknown distance {variant!r}")
    if x.term != y.term:
        return 1.0
    if variant == "crisp":
        return 0.0
    return 0.5 * (1.0 - min(x.confidence, y.confidence))


def rule_distance(x: FuzzyRule, y: FuzzyRule, variant: str = "fuzzy") -> float:
    """Sum of symbol-wise distances over aligned antecedent positions."""
    if len(x.antecedent) != len(y.antecedent):
        raise ValidationError("rules have different antecedent lengths")
    d = 0.0
    for xa, ya in zip(x.antecedent, y.antecedent):
        d += feature_distance(xa, ya, variant)
    return d


def fuzzy_relation(y: FuzzyRule, x: FuzzyRule, cfg: ScoringConfig) -> float:
    """Similarity of y to x, weighted by x's own class confidence."""
    d = rule_distance(x, y, cfg.distance)
    return class_membership(x, x.class_label) * float(np.exp(-cfg.smoothing * d))


def _antecedent_arrays(kb: KnowledgeBase) -> tuple[np.ndarray, np.ndarray]:
    """Map antecedents to (n, F) term-index and membership arrays."""
    n = len(kb.rules)
    n_feat = len(kb.rules[0].antecedent) if n else 0
    term_idx = np.zeros((n, n_feat), dtype=np.int64)
    conf = np.zeros((n, n_feat))
    vocab: list[dict[str, int]] = [{} for _ in range(n_feat)]
    for r_i, rule in enumerate(kb.rules):
        if len(rule.antecedent) != n_feat:
            raise ValidationError("rules have inconsistent antecedent lengths")
        for f_i, a in enumerate(rule.antecedent):
            idx = vocab[f_i].setdefault(a.term, len(vocab[f_i]))
            term_idx[r_i, f_i] = idx
            conf[r_i, f_i] = a.confidence
    return term_idx, conf


def _distance_matrix(term_idx: np.ndarray, conf: np.ndarray, variant: str,
                     exclude: int | None = None) -> np.ndarray:
    n, n_feat = term_idx.shape
    dist = np.zeros((n, n))
    for f in range(n_feat):
        if f == exclude:
            continue
        same = term_idx[:, f][:, None] == term_idx[:, f][None, :]
        if variant == "crisp":
            dist += np.where(same, 0.0, 1.0)
        else:
            delta = 0.5 * (1.0 - np.minimum(conf[:, f][:, None], conf[:, f][None, :]))
            dist += np.where(same, delta, 1.0)
    return dist


def _score_vector(kb: KnowledgeBase, cfg: ScoringConfig,
                  exclude_feature: int | None = None) -> np.ndarray:
    theta = np.array([r.class_confidence for r in kb.rules])
    class_ids: dict[str, int] = {}
    labels = np.array([class_ids.setdefault(r.class_label, len(class_ids))
                       for r in kb.rules])
    term_idx, conf = _antecedent_arrays(kb)
    dist = _distance_matrix(term_idx, conf, cfg.distance, exclude=exclude_feature)
    # rows index the quantified rule y, columns the rule x being scored
    sim = np.exp(-cfg.smoothing * dist) * theta[None, :]
    same_class = labels[:, None] == labels[None, :]
    target = np.where(same_class, theta[:, None], 0.0)
    necessity = _implicator_matrix(cfg.implicator, sim, target).min(axis=0)
    return np.minimum(theta, necessity)


def score_rules(kb: KnowledgeBase, cfg: ScoringConfig) -> list[RegionMembership]:
    """Score every rule and write the result back into ``rule_confidence``.

    The returned memberships equal a naive double loop over all rule pairs;
    the matrix form only reorganizes the same arithmetic.
    """
    if not kb.rules:
        kb.scoring_config = cfg
        return []
    scores = _score_vector(kb, cfg)
    out = []
    for rule, s in zip(kb.rules, scores):
        rule.rule_confidence = float(s)
        out.append(RegionMembership(rule.id, rule.class_label, float(s)))
    kb.scoring_config = cfg
    return out


def complexity(kb: KnowledgeBase) -> float:
    """One minus the mean rule confidence: how much the base conflicts."""
    if not kb.rules:
        raise ValidationError("empty knowledge base")
    if kb.scoring_config is None:
        raise ValidationError("knowledge base is not scored")
    return 1.0 - float(np.mean([r.rule_confidence for r in kb.rules]))


def top_rules(kb: KnowledgeBase, n: int) -> list[FuzzyRule]:
    """The n most confident rules, ties broken toward lower ids."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    if kb.scoring_config is None:
        raise ValidationError("knowledge base is not scored")
    if n > len(kb.rules):
        warnings.warn(f"requested {n} rules from a base of {len(kb.rules)}",
                      EngineWarning, stacklevel=2)
        n = len(kb.rules)
    return sorted(kb.rules, key=lambda r: (-r.rule_confidence, r.id))[:n]


def bias_proxy(kb: KnowledgeBase, feature: str, cfg: ScoringConfig) -> float:
    """Relative change in lower-approximation memberships when one feature is
    dropped from the rule distance: a stand-in measure of how strongly the
    decision regions lean on that feature. Clipped to [0, 1]."""
    position = kb.feature_position(feature)
    with_feature = _score_vector(kb, cfg)
    without_feature = _score_vector(kb, cfg, exclude_feature=position)
    shift = float(np.abs(with_feature - without_feature).sum())
    mass = max(float(with_feature.sum()), _BIAS_EPS)
    return float(np.clip(shift / mass, 0.0, 1.0))
