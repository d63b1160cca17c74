import numpy as np
import pytest

from fuzzykb.dataset import FeatureSpec
from fuzzykb.errors import DomainError, EngineWarning, ValidationError
from fuzzykb.granulation import SymbolAssignment
from fuzzykb.rulebase import FuzzyRule, KnowledgeBase
from fuzzykb.scoring import (
    ScoringConfig,
    bias_proxy,
    class_membership,
    complexity,
    feature_distance,
    fuzzy_relation,
    implicator,
    rule_distance,
    score_rules,
    top_rules,
)

from oracles import IMPLICATOR_FNS, make_random_kb, naive_score_rules

GRID = [round(0.05 * i, 2) for i in range(21)]
ALL_IMPLICATORS = ("fodor", "goguen", "godel", "lukasiewicz")


def _rule(rid, terms_confs, label, p, antecedent_len=None):
    ante = tuple(SymbolAssignment(t, c) for t, c in terms_confs)
    return FuzzyRule(id=rid, antecedent=ante, class_label=label,
                     class_confidence=p)


def _kb(rules, n_features, classes=("A", "B")):
    features = [FeatureSpec(f"f{i}", "nominal", ("t0", "t1", "t2", "t3"))
                for i in range(n_features)]
    return KnowledgeBase(rules=rules, antecedent_features=features,
                         class_domain=tuple(classes))


class TestClassMembership:
    def test_own_class(self):
        r = _rule(0, [("t0", 1.0)], "A", 0.9)
        assert class_membership(r, "A", ("A", "B")) == 0.9

    def test_other_class(self):
        r = _rule(0, [("t0", 1.0)], "A", 0.9)
        assert class_membership(r, "B", ("A", "B")) == 0.0

    def test_unknown_class(self):
        r = _rule(0, [("t0", 1.0)], "A", 0.9)
        with pytest.raises(DomainError):
            class_membership(r, "C", ("A", "B"))

    def test_unit_confidence_convention(self):
        # without model probabilities the class confidence defaults to one
        r = _rule(0, [("t0", 1.0)], "A", 1.0)
        assert class_membership(r, "A", ("A", "B")) == 1.0


class TestFeatureDistance:
    def test_same_term_full_membership(self):
        a = SymbolAssignment("low", 1.0)
        assert feature_distance(a, a, "fuzzy") == 0.0

    def test_same_term_partial_membership(self):
        a = SymbolAssignment("low", 0.8)
        b = SymbolAssignment("low", 0.6)
        assert feature_distance(a, b, "fuzzy") == pytest.approx(0.2)

    def test_different_terms(self):
        a = SymbolAssignment("low", 1.0)
        b = SymbolAssignment("high", 1.0)
        assert feature_distance(a, b, "crisp") == 1.0
        assert feature_distance(a, b, "fuzzy") == 1.0

    def test_same_term_crisp_ignores_membership(self):
        a = SymbolAssignment("low", 0.4)
        b = SymbolAssignment("low", 0.9)
        assert feature_distance(a, b, "crisp") == 0.0

    def test_same_term_penalty_capped_at_half(self):
        a = SymbolAssignment("low", 0.0)
        b = SymbolAssignment("low", 0.0)
        assert feature_distance(a, b, "fuzzy") == 0.5


class TestRuleDistance:
    def test_identical_rules_full_membership(self):
        r = _rule(0, [("t0", 1.0)] * 3, "A", 1.0)
        assert rule_distance(r, r, "fuzzy") == 0.0

    def test_same_terms_half_memberships(self):
        x = _rule(0, [("t0", 0.5)] * 8, "A", 1.0)
        y = _rule(1, [("t0", 0.5)] * 8, "A", 1.0)
        assert rule_distance(x, y, "fuzzy") == pytest.approx(2.0)

    def test_all_terms_differ(self):
        x = _rule(0, [("t0", 1.0)] * 5, "A", 1.0)
        y = _rule(1, [("t1", 1.0)] * 5, "A", 1.0)
        assert rule_distance(x, y, "crisp") == 5.0

    def test_length_mismatch(self):
        x = _rule(0, [("t0", 1.0)], "A", 1.0)
        y = _rule(1, [("t0", 1.0)] * 2, "A", 1.0)
        with pytest.raises(ValidationError):
            rule_distance(x, y, "crisp")


class TestRelation:
    def test_zero_distance_certain_class(self):
        x = _rule(0, [("t0", 1.0)], "A", 1.0)
        assert fuzzy_relation(x, x, ScoringConfig(distance="crisp")) == 1.0

    def test_exponential_decay(self):
        x = _rule(0, [("t0", 1.0)], "A", 1.0)
        y = _rule(1, [("t1", 1.0)], "A", 1.0)
        got = fuzzy_relation(y, x, ScoringConfig(smoothing=1.0))
        assert got == pytest.approx(np.exp(-1.0))
        assert got == pytest.approx(0.367879, abs=1e-6)

    def test_zero_class_confidence(self):
        x = _rule(0, [("t0", 1.0)], "A", 0.0)
        y = _rule(1, [("t0", 1.0)], "A", 1.0)
        assert fuzzy_relation(y, x, ScoringConfig()) == 0.0

    def test_self_relation_crisp_equals_class_confidence(self):
        x = _rule(0, [("t0", 0.7)], "A", 0.85)
        assert fuzzy_relation(x, x, ScoringConfig(distance="crisp")) == 0.85

    def test_self_relation_fuzzy_not_assumed_full(self):
        x = _rule(0, [("t0", 0.7)], "A", 0.85)
        assert fuzzy_relation(x, x, ScoringConfig(distance="fuzzy")) <= 0.85


class TestImplicator:
    @pytest.mark.parametrize("name", ALL_IMPLICATORS)
    def test_boundary_conditions(self, name):
        assert implicator(name, 0.0, 0.0) == 1.0
        assert implicator(name, 1.0, 0.0) == 0.0
        assert implicator(name, 1.0, 1.0) == 1.0

    @pytest.mark.parametrize("name", ALL_IMPLICATORS)
    def test_reflexive_inputs(self, name):
        for v in GRID:
            assert implicator(name, v, v) == 1.0

    def test_hand_values(self):
        assert implicator("lukasiewicz", 0.6, 0.3) == pytest.approx(0.7)
        assert implicator("fodor", 0.6, 0.3) == pytest.approx(0.4)
        assert implicator("godel", 0.6, 0.3) == pytest.approx(0.3)
        assert implicator("goguen", 0.6, 0.3) == pytest.approx(0.5)

    @pytest.mark.parametrize("name", ALL_IMPLICATORS)
    def test_rejects_out_of_range(self, name):
        with pytest.raises(DomainError):
            implicator(name, 1.2, 0.0)
        with pytest.raises(DomainError):
            implicator(name, 0.5, -0.1)

    @pytest.mark.parametrize("name", ALL_IMPLICATORS)
    def test_monotonicity_laws_on_grid(self, name):
        for b in GRID:
            values = [implicator(name, a, b) for a in GRID]
            assert all(x >= y for x, y in zip(values, values[1:]))
        for a in GRID:
            values = [implicator(name, a, b) for b in GRID]
            assert all(x <= y for x, y in zip(values, values[1:]))

    def test_pointwise_dominance(self):
        for a in GRID:
            for b in GRID:
                assert implicator("fodor", a, b) <= implicator("lukasiewicz", a, b)
                assert implicator("godel", a, b) <= implicator("goguen", a, b)

    def test_b_zero_collapses_pairs(self):
        for a in GRID:
            assert implicator("fodor", a, 0.0) == implicator("lukasiewicz", a, 0.0)
            assert implicator("fodor", a, 0.0) == 1.0 - a
            expected = 0.0 if a > 0 else 1.0
            assert implicator("godel", a, 0.0) == expected
            assert implicator("goguen", a, 0.0) == expected

    def test_matches_independent_definitions(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a, b = rng.uniform(0, 1, 2)
            for name, fn in IMPLICATOR_FNS.items():
                assert implicator(name, a, b) == fn(a, b)


class TestScoreRules:
    def test_singleton_kb(self):
        for p in (1.0, 0.7, 0.4):
            kb = _kb([_rule(0, [("t0", 1.0)], "A", p)], 1)
            score_rules(kb, ScoringConfig(distance="crisp"))
            assert kb.rules[0].rule_confidence == pytest.approx(p)

    def test_single_class_hard_labels_all_one(self):
        rng = np.random.default_rng(1)
        kb = make_random_kb(rng, 12, 1, 4, hard_labels=True)
        score_rules(kb, ScoringConfig(implicator="lukasiewicz"))
        assert all(r.rule_confidence == 1.0 for r in kb.rules)

    def test_two_classes_hard_labels_godel_all_zero(self):
        rules = [
            _rule(0, [("t0", 1.0), ("t0", 1.0)], "A", 1.0),
            _rule(1, [("t0", 1.0), ("t1", 1.0)], "A", 1.0),
            _rule(2, [("t1", 1.0), ("t0", 1.0)], "B", 1.0),
            _rule(3, [("t1", 1.0), ("t1", 1.0)], "B", 1.0),
        ]
        kb = _kb(rules, 2)
        score_rules(kb, ScoringConfig(implicator="godel"))
        assert all(r.rule_confidence == 0.0 for r in kb.rules)
        score_rules(kb, ScoringConfig(implicator="goguen"))
        assert all(r.rule_confidence == 0.0 for r in kb.rules)

    @pytest.mark.parametrize("implicator_name", ALL_IMPLICATORS)
    @pytest.mark.parametrize("distance", ("crisp", "fuzzy"))
    def test_bit_equal_to_naive_double_loop(self, implicator_name, distance):
        rng = np.random.default_rng(42)
        for _ in range(5):
            kb = make_random_kb(rng, int(rng.integers(5, 40)),
                                int(rng.integers(2, 4)), int(rng.integers(2, 6)))
            for lam in (0.5, 1.0, 2.0):
                cfg = ScoringConfig(implicator=implicator_name,
                                    distance=distance, smoothing=lam)
                score_rules(kb, cfg)
                expected = naive_score_rules(kb, implicator_name, distance, lam)
                got = [r.rule_confidence for r in kb.rules]
                assert got == expected  # bit-exact

    def test_confidence_never_exceeds_class_confidence(self):
        rng = np.random.default_rng(9)
        kb = make_random_kb(rng, 30, 3, 4)
        for name in ALL_IMPLICATORS:
            score_rules(kb, ScoringConfig(implicator=name))
            for r in kb.rules:
                assert r.rule_confidence <= r.class_confidence + 1e-15

    def test_dominance_carries_to_scores(self):
        rng = np.random.default_rng(10)
        kb = make_random_kb(rng, 25, 2, 5)
        scores = {}
        for name in ALL_IMPLICATORS:
            score_rules(kb, ScoringConfig(implicator=name))
            scores[name] = [r.rule_confidence for r in kb.rules]
        for fd, lk in zip(scores["fodor"], scores["lukasiewicz"]):
            assert fd <= lk + 1e-15
        for gd, gg in zip(scores["godel"], scores["goguen"]):
            assert gd <= gg + 1e-15

    def test_lambda_monotone_for_lukasiewicz(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            kb = make_random_kb(rng, 20, 3, 4)
            previous = None
            for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
                score_rules(kb, ScoringConfig(smoothing=lam))
                current = [r.rule_confidence for r in kb.rules]
                if previous is not None:
                    for old, new in zip(previous, current):
                        assert new >= old - 1e-12
                previous = current

    def test_empty_kb(self):
        kb = _kb([], 2)
        assert score_rules(kb, ScoringConfig()) == []


class TestAggregates:
    def test_complexity_all_certain(self):
        kb = _kb([_rule(0, [("t0", 1.0)], "A", 1.0),
                  _rule(1, [("t1", 1.0)], "A", 1.0)], 1, classes=("A",))
        score_rules(kb, ScoringConfig(implicator="lukasiewicz"))
        assert complexity(kb) == 0.0

    def test_complexity_arithmetic(self):
        kb = _kb([_rule(0, [("t0", 1.0)], "A", 1.0),
                  _rule(1, [("t1", 1.0)], "A", 1.0)], 1)
        kb.scoring_config = ScoringConfig()
        kb.rules[0].rule_confidence = 1.0
        kb.rules[1].rule_confidence = 0.5
        assert complexity(kb) == pytest.approx(0.25)

    def test_complexity_empty(self):
        kb = _kb([], 1)
        with pytest.raises(ValidationError):
            complexity(kb)

    def test_complexity_in_unit_interval(self, diabetes_kb):
        assert 0.0 <= complexity(diabetes_kb) <= 1.0

    def test_top_rules_tie_by_id(self):
        kb = _kb([_rule(1, [("t0", 1.0)], "A", 1.0),
                  _rule(2, [("t1", 1.0)], "A", 1.0),
                  _rule(3, [("t2", 1.0)], "A", 1.0)], 1)
        kb.scoring_config = ScoringConfig()
        kb.rules[0].rule_confidence = 0.2
        kb.rules[1].rule_confidence = 0.9
        kb.rules[2].rule_confidence = 0.9
        assert [r.id for r in top_rules(kb, 1)] == [2]
        assert [r.id for r in top_rules(kb, 3)] == [2, 3, 1]

    def test_top_rules_overflow_warns(self, diabetes_kb):
        with pytest.warns(EngineWarning):
            rules = top_rules(diabetes_kb, 10_000)
        assert len(rules) == 768

    def test_top_rules_bad_n(self, diabetes_kb):
        with pytest.raises(ValidationError):
            top_rules(diabetes_kb, 0)


class TestBiasProxy:
    def test_irrelevant_feature_scores_zero(self):
        # f0 is identical in every rule, so dropping it leaves all pairwise
        # distances unchanged under the crisp variant
        rules = [
            _rule(0, [("t0", 1.0), ("t0", 1.0)], "A", 1.0),
            _rule(1, [("t0", 1.0), ("t1", 1.0)], "B", 1.0),
        ]
        kb = _kb(rules, 2)
        got = bias_proxy(kb, "f0", ScoringConfig(distance="crisp"))
        assert got == 0.0

    def test_three_rule_brute_force(self):
        rules = [
            _rule(0, [("t0", 1.0)], "A", 1.0),
            _rule(1, [("t1", 1.0)], "A", 0.8),
            _rule(2, [("t2", 1.0)], "B", 1.0),
        ]
        kb = _kb(rules, 1)
        cfg = ScoringConfig(distance="crisp", smoothing=1.0)
        with_feature = np.array(naive_score_rules(kb, "lukasiewicz", "crisp", 1.0))
        # dropping the only feature collapses every distance to zero
        without = []
        for x in kb.rules:
            tx = x.class_confidence
            inf_term = 1.0
            for y in kb.rules:
                rel = tx * float(np.exp(-0.0))
                ty = y.class_confidence if y.class_label == x.class_label else 0.0
                inf_term = min(inf_term, min(1.0, 1.0 - rel + ty))
            without.append(min(tx, inf_term))
        expected = float(np.abs(with_feature - np.array(without)).sum()
                         / max(with_feature.sum(), 1e-12))
        assert bias_proxy(kb, "f0", cfg) == pytest.approx(min(expected, 1.0))

    def test_unknown_feature(self, diabetes_kb):
        with pytest.raises(DomainError):
            bias_proxy(diabetes_kb, "nope", ScoringConfig())

    def test_result_in_unit_interval(self, diabetes_kb):
        value = bias_proxy(diabetes_kb, "Age", diabetes_kb.scoring_config)
        assert 0.0 <= value <= 1.0
