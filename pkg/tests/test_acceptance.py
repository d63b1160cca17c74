"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers. Tolerances are fixed here, not
configurable."""

import json
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from fuzzykb import dataset, granulation, prediction, rulebase, scoring
from fuzzykb.granulation import FcmConfig, FeatureGranulation, fit_fcm
from fuzzykb.pipeline import run_pipeline
from fuzzykb.queries import Query, QueryConstraints, closest_rule, resolve
from fuzzykb.scoring import ScoringConfig, score_rules

from conftest import DATA_DIR, build_kb_for
from oracles import (
    make_random_kb,
    naive_closest,
    naive_resolve,
    naive_score_rules,
)

GOLDEN = Path(__file__).resolve().parent / "golden"
GRID = np.round(np.linspace(0.0, 1.0, 21), 10)
ALL_IMPLICATORS = ("fodor", "goguen", "godel", "lukasiewicz")


def _report(name: str, detail: str = ""):
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: PASS{suffix}")


@pytest.fixture(scope="module")
def desk_data():
    """Normalized datasets + baseline predictions for the three demo sets."""
    out = {}
    for name in ("diabetes", "wine", "vertebral"):
        ds = dataset.parse_arff((DATA_DIR / f"{name}.arff").read_text())
        ds = dataset.normalize(dataset.impute(ds))
        train, _ = dataset.split(ds, dataset.SplitConfig(0.8, seed=0))
        preds = prediction.baseline_classify(train, ds, k=5)
        out[name] = (ds, preds)
    return out


def test_implicator_suite():
    started = time.perf_counter()
    for name in ALL_IMPLICATORS:
        assert scoring.implicator(name, 0.0, 0.0) == 1.0
        assert scoring.implicator(name, 1.0, 0.0) == 0.0
        assert scoring.implicator(name, 1.0, 1.0) == 1.0
        table = {(a, b): scoring.implicator(name, float(a), float(b))
                 for a in GRID for b in GRID}
        for b in GRID:
            col = [table[(a, b)] for a in GRID]
            assert all(x >= y for x, y in zip(col, col[1:])), name
        for a in GRID:
            row = [table[(a, b)] for b in GRID]
            assert all(x <= y for x, y in zip(row, row[1:])), name
    for a in GRID:
        for b in GRID:
            a_f, b_f = float(a), float(b)
            assert scoring.implicator("fodor", a_f, b_f) <= \
                scoring.implicator("lukasiewicz", a_f, b_f)
            assert scoring.implicator("godel", a_f, b_f) <= \
                scoring.implicator("goguen", a_f, b_f)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report("implicator suite", f"21x21 grid, {elapsed:.2f}s")


def test_lower_approximation_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(20240611)
    checked = 0
    for _ in range(20):
        kb = make_random_kb(rng,
                            n_rules=int(rng.integers(5, 51)),
                            n_classes=int(rng.integers(2, 5)),
                            n_features=int(rng.integers(2, 7)))
        for implicator in ALL_IMPLICATORS:
            for distance in ("crisp", "fuzzy"):
                for lam in (0.5, 1.0, 2.0):
                    cfg = ScoringConfig(implicator=implicator,
                                        distance=distance, smoothing=lam)
                    score_rules(kb, cfg)
                    produced = [r.rule_confidence for r in kb.rules]
                    expected = naive_score_rules(kb, implicator, distance, lam)
                    assert produced == expected, (implicator, distance, lam)
                    checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    _report("lower-approximation oracle equivalence",
            f"20 KBs x {checked // 20} configs, bit-equal, {elapsed:.1f}s")


def test_godel_goguen_coincidence():
    rng = np.random.default_rng(7)
    multi = make_random_kb(rng, 30, 3, 4, hard_labels=True)
    for implicator in ("godel", "goguen"):
        score_rules(multi, ScoringConfig(implicator=implicator))
        values = {r.rule_confidence for r in multi.rules}
        assert values == {0.0}, implicator
    single = make_random_kb(rng, 20, 1, 4, hard_labels=True)
    for implicator in ("godel", "goguen"):
        score_rules(single, ScoringConfig(implicator=implicator))
        values = {r.rule_confidence for r in single.rules}
        assert values == {1.0}, implicator
    _report("godel/goguen hard-label coincidence",
            "multi-class all 0.0, single-class all 1.0, exact")


def test_lukasiewicz_fodor_empirical_coincidence(desk_data):
    worst = 0.0
    offenders = []
    for name, (ds, preds) in desk_data.items():
        for c in (3, 5, 7):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                grans = granulation.granulate_dataset(ds, FcmConfig(n_clusters=c))
            kb = rulebase.build_rules(ds, grans, preds)
            for distance in ("crisp", "fuzzy"):
                scores = {}
                for implicator in ("lukasiewicz", "fodor"):
                    score_rules(kb, ScoringConfig(implicator=implicator,
                                                  distance=distance))
                    scores[implicator] = np.array(
                        [r.rule_confidence for r in kb.rules])
                diff = np.abs(scores["lukasiewicz"] - scores["fodor"])
                cell_worst = float(diff.max())
                worst = max(worst, cell_worst)
                if cell_worst > 1e-9:
                    rule_idx = int(np.argmax(diff))
                    offenders.append(
                        f"{name} c={c} {distance} rule {rule_idx}: "
                        f"LK={scores['lukasiewicz'][rule_idx]:.9f} "
                        f"FD={scores['fodor'][rule_idx]:.9f}")
    assert worst <= 1e-9, "violating pairs:\n" + "\n".join(offenders)
    _report("lukasiewicz/fodor empirical coincidence",
            f"3 datasets x c in {{3,5,7}} x 2 distances, max diff {worst:.1e}")


def test_lambda_monotonicity():
    rng = np.random.default_rng(99)
    for _ in range(10):
        kb = make_random_kb(rng,
                            n_rules=int(rng.integers(5, 40)),
                            n_classes=int(rng.integers(2, 4)),
                            n_features=int(rng.integers(2, 6)))
        previous = None
        for lam in (0.25, 0.5, 1.0, 2.0, 4.0):
            score_rules(kb, ScoringConfig(smoothing=lam))
            current = [r.rule_confidence for r in kb.rules]
            if previous is not None:
                for old, new in zip(previous, current):
                    assert new >= old - 1e-12
            previous = current
    _report("lambda monotonicity (lukasiewicz)",
            "10 random KBs, lambda 0.25..4, tolerance 1e-12")


def test_fuzzy_cmeans():
    rng = np.random.default_rng(3)
    values = rng.uniform(0, 1, 500)
    g1 = fit_fcm(values, FcmConfig(n_clusters=5))
    g2 = fit_fcm(values, FcmConfig(n_clusters=5))
    assert g1.prototypes == g2.prototypes  # bit-identical repeat runs
    assert list(g1.prototypes) == sorted(g1.prototypes)
    check = FeatureGranulation("f", g1.prototypes, g1.terms, g1.fuzziness)
    for v in values[:200]:
        u = check.memberships(v)
        assert abs(u.sum() - 1.0) < 1e-9
    three_site = np.repeat([0.0, 0.5, 1.0], 150)
    g3 = fit_fcm(three_site, FcmConfig(n_clusters=3))
    assert np.allclose(g3.prototypes, [0.0, 0.5, 1.0], atol=1e-3)
    _report("fuzzy c-means",
            "row sums 1e-9, sorted, deterministic, three-site within 1e-3")


def test_query_engine_oracles():
    started = time.perf_counter()
    rng = np.random.default_rng(2718)
    kb = make_random_kb(rng, 200, 3, 5)
    for r in kb.rules:
        r.rule_confidence = float(np.round(rng.uniform(0, 1), 6))
    kb.scoring_config = ScoringConfig()
    feature_names = [f.name for f in kb.antecedent_features]
    terms = ["t0", "t1", "t2", "t3"]
    for i in range(50):
        known_n = int(rng.integers(0, 3))
        known_feats = list(rng.choice(feature_names, size=known_n, replace=False))
        rest = [f for f in feature_names if f not in known_feats]
        unknowns = tuple(rng.choice(rest, size=int(rng.integers(1, 4)),
                                    replace=False))
        known = {f: terms[int(rng.integers(4))] for f in known_feats}
        min_rule = float(rng.uniform(0, 0.5))
        desired = f"class_{int(rng.integers(3))}"
        got = resolve(kb, Query(
            kind="whatif", desired_class=desired, unknowns=unknowns,
            known=known,
            constraints=QueryConstraints(min_rule_confidence=min_rule)),
            limit=None)
        expected = naive_resolve(kb, desired, known, list(unknowns),
                                 min_rule_conf=min_rule)
        assert [(s.rule_id, {f: a.term for f, a in s.bindings.items()})
                for s in got.solutions] == expected, f"query {i}"
        reference = kb.rules[int(rng.integers(len(kb.rules)))]
        assert closest_rule(kb, reference).id == \
            naive_closest(kb, reference, "fuzzy")
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _report("query engine oracle equivalence",
            f"50 queries + closest-rule on 200-rule KB, {elapsed:.2f}s")


def test_prolog_roundtrip_diabetes(desk_data):
    ds, preds = desk_data["diabetes"]
    kb = build_kb_for(ds, preds)
    text = rulebase.export_prolog_str(kb)
    back = rulebase.parse_prolog_kb(text)
    assert len(back.rules) == 768
    worst = 0.0
    for orig, parsed in zip(kb.rules, back.rules):
        assert parsed.id == orig.id
        assert parsed.class_label == orig.class_label
        assert [a.term for a in parsed.antecedent] == \
            [a.term for a in orig.antecedent]
        worst = max(worst, abs(parsed.class_confidence - orig.class_confidence),
                    abs(parsed.rule_confidence - orig.rule_confidence),
                    max(abs(a.confidence - b.confidence) for a, b in
                        zip(parsed.antecedent, orig.antecedent)))
    assert worst <= 5e-7
    _report("prolog export round-trip",
            f"768 rules, max confidence drift {worst:.2e}")


def test_saturation_trend(desk_data):
    ds, preds = desk_data["diabetes"]
    averages = {}
    for c in (2, 5, 7, 10):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            grans = granulation.granulate_dataset(ds, FcmConfig(n_clusters=c))
        kb = rulebase.build_rules(ds, grans, preds)
        averages[c] = float(np.mean([a.confidence for r in kb.rules
                                     for a in r.antecedent]))
    assert averages[10] > averages[2]
    early_gain = averages[5] - averages[2]
    late_gain = averages[10] - averages[7]
    assert late_gain < early_gain
    _report("saturation trend",
            f"antecedent confidence c=2: {averages[2]:.4f}, c=5: "
            f"{averages[5]:.4f}, c=7: {averages[7]:.4f}, c=10: {averages[10]:.4f}")


def test_end_to_end_pipeline(tmp_path):
    started = time.perf_counter()
    out_a = tmp_path / "a"
    summary = run_pipeline(DATA_DIR / "diabetes.arff", out_a, baseline=True)
    assert 0.0 <= summary["complexity"] <= 1.0
    assert summary["n_rules"] == 768

    kb = rulebase.kb_from_json((out_a / "kb.json").read_text())
    for kind, desired, contrast, known, unknowns in (
            ("whatif", "tested_negative", None, {"Plas": "very_low"}, ("Age",)),
            ("whatif", "tested_positive", None, {}, ("Mass", "Plas")),
            ("counterfactual", "tested_negative", "tested_positive",
             {"Age": "very_low"}, ("Plas",))):
        result = resolve(kb, Query(kind=kind, desired_class=desired,
                                   contrast_class=contrast,
                                   unknowns=unknowns, known=known))
        assert result.solutions or result.nearest_candidate

    out_b = tmp_path / "b"
    run_pipeline(DATA_DIR / "diabetes.arff", out_b, baseline=True)
    for name in ("granulation.json", "kb.pl", "kb.json", "summary.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    golden = json.loads((GOLDEN / "diabetes_summary.json").read_text())
    assert summary == golden

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    _report("end-to-end pipeline",
            f"complexity {summary['complexity']:.4f}, golden-stable, "
            f"{elapsed:.1f}s for two full runs + queries")


def test_nl_corpus():
    from fuzzykb.nlq import SchemaView, parse
    doc = json.loads(
        (Path(__file__).resolve().parent / "fixtures" / "nl_corpus.json")
        .read_text())
    schema = SchemaView(
        features=tuple(doc["schema"]["features"]),
        terms={f.lower(): tuple(doc["schema"]["terms_for_all"])
               for f in doc["schema"]["features"]},
        classes=tuple(doc["schema"]["classes"]))
    for entry in doc["utterances"]:
        outcome = parse(entry["text"], schema)
        assert not outcome.rejected, entry["text"]
        assert outcome.intent.name == entry["intent"], entry["text"]
        assert outcome.intent.entities == entry["entities"], entry["text"]
    _report("natural-language corpus",
            f"{len(doc['utterances'])} utterances, exact intents + entities")
