"""What-if and counterfactual query resolution over a scored knowledge base.

A query names a desired class, a set of known feature bindings, and a set of
unknown features to solve for. Resolution selects the rules of the desired
class whose antecedents agree with every known binding, applies the optional
confidence/exclusion constraints, and projects the unknown features out of the
surviving rules. Solutions are ranked by rule confidence, then by the weakest
antecedent membership, then by rule id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError, ValidationError
from .granulation import SymbolAssignment
from .rulebase import FuzzyRule, KnowledgeBase
from .scoring import rule_distance

WHATIF = "whatif"
COUNTERFACTUAL = "counterfactual"

DEFAULT_SOLUTION_LIMIT = 3


@dataclass(frozen=True)
class QueryConstraints:
    min_term_confidence: float = 0.0
    min_rule_confidence: float = 0.0
    excluded_terms: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.min_term_confidence <= 1.0:
            raise ValidationError("min_term_confidence must lie in [0, 1]")
        if not 0.0 <= self.min_rule_confidence <= 1.0:
            raise ValidationError("min_rule_confidence must lie in [0, 1]")


@dataclass(frozen=True)
class Query:
    kind: str
    desired_class: str
    unknowns: tuple[str, ...]
    known: dict[str, str] = field(default_factory=dict)
    contrast_class: str | None = None
    constraints: QueryConstraints = field(default_factory=QueryConstraints)

    def __post_init__(self):
        if self.kind not in (WHATIF, COUNTERFACTUAL):
            raise ValidationError(f"unknown query kind {self.kind!r}")
        if self.kind == WHATIF and self.contrast_class is not None:
            raise ValidationError("contrast_class only applies to counterfactuals")


@dataclass(frozen=True)
class Solution:
    rule_id: int
    bindings: dict[str, SymbolAssignment]
    rule_confidence: float


@dataclass(frozen=True)
class QueryResult:
    solutions: tuple[Solution, ...]
    relaxed_known: bool = False
    nearest_candidate: tuple[int, int] | None = None  # (rule id, mismatches)


def _canonicalize(kb: KnowledgeBase, q: Query) -> Query:
    desired = kb.canonical_class(q.desired_class)
    contrast = None
    if q.kind == COUNTERFACTUAL and q.contrast_class is not None:
        contrast = kb.canonical_class(q.contrast_class)
        if contrast == desired:
            raise ValidationError("contrast class equals the desired class")
    known = {kb.canonical_feature(f): kb.canonical_term(kb.canonical_feature(f), t)
             for f, t in q.known.items()}
    unknowns = tuple(kb.canonical_feature(f) for f in q.unknowns)
    if not unknowns:
        raise ValidationError("query must name at least one unknown feature")
    if len(set(unknowns)) != len(unknowns):
        raise ValidationError("duplicate unknown features")
    overlap = set(unknowns) & set(known)
    if overlap:
        raise ValidationError(f"features both known and unknown: {sorted(overlap)}")
    excluded = {}
    for f, terms in q.constraints.excluded_terms.items():
        name = kb.canonical_feature(f)
        excluded[name] = frozenset(kb.canonical_term(name, t) for t in terms)
    constraints = QueryConstraints(
        min_term_confidence=q.constraints.min_term_confidence,
        min_rule_confidence=q.constraints.min_rule_confidence,
        excluded_terms=excluded,
    )
    return Query(kind=q.kind, desired_class=desired, unknowns=unknowns,
                 known=known, contrast_class=contrast, constraints=constraints)


def _matches(kb: KnowledgeBase, rule: FuzzyRule, q: Query) -> bool:
    if rule.class_label != q.desired_class:
        return False
    for f, term in q.known.items():
        if rule.antecedent[kb.feature_position(f)].term != term:
            return False
    if rule.rule_confidence < q.constraints.min_rule_confidence:
        return False
    for f in q.unknowns:
        cell = rule.antecedent[kb.feature_position(f)]
        if cell.confidence < q.constraints.min_term_confidence:
            return False
        if cell.term in q.constraints.excluded_terms.get(f, frozenset()):
            return False
    return True


def _nearest_candidate(kb: KnowledgeBase, q: Query) -> tuple[int, int] | None:
    """Among rules of the desired class, the one violating fewest known
    bindings; a hint for empty results."""
    best: tuple[int, int] | None = None
    for rule in kb.rules:
        if rule.class_label != q.desired_class:
            continue
        mismatches = sum(
            1 for f, term in q.known.items()
            if rule.antecedent[kb.feature_position(f)].term != term)
        if best is None or (mismatches, rule.id) < (best[1], best[0]):
            best = (rule.id, mismatches)
    return best


def resolve(kb: KnowledgeBase, q: Query,
            limit: int | None = DEFAULT_SOLUTION_LIMIT) -> QueryResult:
    """Solve a query against the knowledge base.

    Name matching is case-insensitive. An empty result is returned (not
    raised) when no rule satisfies the query; it carries a nearest-candidate
    hint instead of synthesizing instances.
    """
    q = _canonicalize(kb, q)
    ranked = []
    for rule in kb.rules:
        if not _matches(kb, rule, q):
            continue
        weakest = min((a.confidence for a in rule.antecedent), default=1.0)
        ranked.append((-rule.rule_confidence, -weakest, rule.id, rule))
    ranked.sort(key=lambda item: item[:3])

    solutions = []
    for _, _, _, rule in ranked if limit is None else ranked[:limit]:
        bindings = {f: rule.antecedent[kb.feature_position(f)] for f in q.unknowns}
        solutions.append(Solution(rule_id=rule.id, bindings=bindings,
                                  rule_confidence=rule.rule_confidence))
    nearest = _nearest_candidate(kb, q) if not solutions else None
    return QueryResult(solutions=tuple(solutions),
                       relaxed_known=not q.known,
                       nearest_candidate=nearest)


def closest_rule(kb: KnowledgeBase, reference: FuzzyRule) -> FuzzyRule:
    """The rule nearest to ``reference`` under the base's configured distance
    variant, excluding the reference itself; ties keep the lowest id."""
    variant = kb.scoring_config.distance if kb.scoring_config else "fuzzy"
    best: tuple[float, int, FuzzyRule] | None = None
    for rule in kb.rules:
        if rule.id == reference.id:
            continue
        d = rule_distance(reference, rule, variant)
        if best is None or (d, rule.id) < (best[0], best[1]):
            best = (d, rule.id, rule)
    if best is None:
        raise ValidationError("knowledge base holds no rule besides the reference")
    return best[2]


class QuerySession:
    """Per-conversation memory of the most recent resolution, so follow-up
    questions ("what rule is closest to this one?") have a referent."""

    def __init__(self):
        self._last: tuple[Query, QueryResult, FuzzyRule | None] | None = None

    def record(self, kb: KnowledgeBase, q: Query, result: QueryResult) -> None:
        source = None
        if result.solutions:
            source = kb.rule_by_id(result.solutions[0].rule_id)
        self._last = (q, result, source)

    def last_query_context(self) -> tuple[Query, QueryResult, FuzzyRule | None] | None:
        return self._last
