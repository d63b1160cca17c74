"""Batch pipeline: ARFF in, scored knowledge base artifacts out."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import SplitConfig, impute, normalize, parse_arff, split
from .errors import ValidationError
from .granulation import FcmConfig, granulate_dataset, granulations_to_json
from .prediction import accuracy, baseline_classify, ingest_predictions
from .rulebase import build_rules, export_prolog_str, kb_to_json
from .scoring import ScoringConfig, complexity, score_rules


def run_pipeline(data_path: str | Path, out_dir: str | Path,
                 predictions_path: str | Path | None = None,
                 baseline: bool = False, baseline_k: int = 5,
                 symbols: int = 5, implicator: str = "lukasiewicz",
                 distance: str = "fuzzy", smoothing: float = 1.0,
                 train_fraction: float = 0.8, seed: int = 0) -> dict:
    """Parse, impute, normalize, granulate, predict, build, score, export.

    Writes granulation.json, kb.pl, kb.json and summary.json into ``out_dir``
    and returns the summary. Predictions come either from an external CSV or
    from the built-in baseline trained on a stratified split.
    """
    data_path = Path(data_path)
    out_dir = Path(out_dir)
    if predictions_path is None and not baseline:
        raise ValidationError("provide a predictions file or enable the baseline")

    ds = normalize(impute(parse_arff(data_path.read_text(encoding="utf-8"))))

    test_accuracy = None
    if predictions_path is not None:
        preds = ingest_predictions(
            ds, Path(predictions_path).read_text(encoding="utf-8"))
    else:
        train, test = split(ds, SplitConfig(train_fraction, seed))
        preds = baseline_classify(train, ds, k=baseline_k)
        test_accuracy = accuracy(baseline_classify(train, test, k=baseline_k), test)

    grans = granulate_dataset(ds, FcmConfig(n_clusters=symbols))
    kb = build_rules(ds, grans, preds)
    cfg = ScoringConfig(implicator=implicator, distance=distance,
                        smoothing=smoothing)
    score_rules(kb, cfg)

    rule_confs = np.array([r.rule_confidence for r in kb.rules])
    ante_confs = np.array([a.confidence for r in kb.rules for a in r.antecedent])
    summary = {
        "dataset": ds.relation_name,
        "source": data_path.name,
        "n_rows": ds.n_rows,
        "n_features": len(ds.non_class_features()),
        "n_rules": len(kb.rules),
        "config": {"symbols": symbols, "implicator": implicator,
                   "distance": distance, "lambda": smoothing,
                   "predictions": ("baseline" if predictions_path is None
                                   else Path(predictions_path).name)},
        "avg_rule_confidence": float(rule_confs.mean()),
        "avg_antecedent_confidence": float(ante_confs.mean()),
        "complexity": complexity(kb),
    }
    if test_accuracy is not None:
        summary["baseline_test_accuracy"] = test_accuracy

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "granulation.json").write_text(
        granulations_to_json(grans), encoding="utf-8")
    (out_dir / "kb.pl").write_text(export_prolog_str(kb), encoding="utf-8")
    (out_dir / "kb.json").write_text(kb_to_json(kb), encoding="utf-8")
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    return summary
