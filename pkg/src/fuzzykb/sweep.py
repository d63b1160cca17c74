"""Sensitivity sweeps over symbol count, smoothing, implicator and distance.

Produces one CSV row per grid cell with the average rule confidence, the
average antecedent confidence and the 10th/90th percentile band of rule
confidences. Cell failures land in the ``error`` column and the sweep
continues. Line charts are written as self-contained SVG, one per dataset,
so headless runs need no plotting stack.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from .dataset import SplitConfig, impute, normalize, parse_arff, split
from .errors import ValidationError
from .granulation import FcmConfig, granulate_dataset
from .prediction import baseline_classify, ingest_predictions
from .rulebase import build_rules
from .scoring import DISTANCES, IMPLICATORS, ScoringConfig, score_rules

CSV_COLUMNS = ["dataset", "c", "lambda", "implicator", "distance",
               "avg_rule_conf", "avg_antecedent_conf", "p10", "p90", "error"]


@dataclass
class SweepSpec:
    datasets: list[str]
    predictions: list[str | None] = field(default_factory=list)
    symbol_counts: list[int] = field(default_factory=lambda: list(range(2, 11)))
    lambdas: list[float] = field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0, 4.0])
    implicators: list[str] = field(default_factory=lambda: list(IMPLICATORS))
    distances: list[str] = field(default_factory=lambda: list(DISTANCES))
    baseline_k: int = 5
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not self.datasets:
            raise ValidationError("sweep needs at least one dataset")
        if not self.predictions:
            self.predictions = [None] * len(self.datasets)
        if len(self.predictions) != len(self.datasets):
            raise ValidationError("predictions list must align with datasets")
        for grid in (self.symbol_counts, self.lambdas, self.implicators,
                     self.distances):
            if not grid:
                raise ValidationError("sweep grids must be non-empty")

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        doc = json.loads(text)
        return cls(**doc)


def run_sweep(spec: SweepSpec) -> list[dict]:
    rows: list[dict] = []
    for data_path, pred_path in zip(spec.datasets, spec.predictions):
        name = Path(data_path).stem
        try:
            ds = normalize(impute(parse_arff(
                Path(data_path).read_text(encoding="utf-8"))))
            if pred_path is not None:
                preds = ingest_predictions(
                    ds, Path(pred_path).read_text(encoding="utf-8"))
            else:
                train, _ = split(ds, SplitConfig(spec.train_fraction, spec.seed))
                preds = baseline_classify(train, ds, k=spec.baseline_k)
        except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
            rows.append(_error_row(name, "", "", "", "", str(exc)))
            continue
        for c in spec.symbol_counts:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    grans = granulate_dataset(ds, FcmConfig(n_clusters=c))
                kb = build_rules(ds, grans, preds)
                ante = float(np.mean([a.confidence for r in kb.rules
                                      for a in r.antecedent]))
            except Exception as exc:  # noqa: BLE001
                rows.append(_error_row(name, c, "", "", "", str(exc)))
                continue
            for lam in spec.lambdas:
                for implicator in spec.implicators:
                    for distance in spec.distances:
                        try:
                            score_rules(kb, ScoringConfig(
                                implicator=implicator, distance=distance,
                                smoothing=lam))
                            confs = np.array([r.rule_confidence
                                              for r in kb.rules])
                            rows.append({
                                "dataset": name, "c": c, "lambda": lam,
                                "implicator": implicator, "distance": distance,
                                "avg_rule_conf": float(confs.mean()),
                                "avg_antecedent_conf": ante,
                                "p10": float(np.percentile(confs, 10)),
                                "p90": float(np.percentile(confs, 90)),
                                "error": "",
                            })
                        except Exception as exc:  # noqa: BLE001
                            rows.append(_error_row(name, c, lam, implicator,
                                                   distance, str(exc)))
    return rows


def _error_row(dataset, c, lam, implicator, distance, error) -> dict:
    return {"dataset": dataset, "c": c, "lambda": lam,
            "implicator": implicator, "distance": distance,
            "avg_rule_conf": "", "avg_antecedent_conf": "",
            "p10": "", "p90": "", "error": error}


def write_csv(rows: list[dict], sink: TextIO) -> None:
    writer = csv.DictWriter(sink, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


# -- SVG line charts ---------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#7f7f7f"]


def render_sweep_svg(rows: list[dict], dataset: str,
                     lam: float | None = None) -> str:
    """Average rule confidence against symbol count, one line per
    (implicator, distance) pair, at a single smoothing value."""
    data = [r for r in rows
            if r["dataset"] == dataset and not r["error"]]
    if lam is None and data:
        lam = data[0]["lambda"]
    data = [r for r in data if r["lambda"] == lam]
    if not data:
        return _svg_shell(dataset, lam, [], [], "no data")

    series: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for r in data:
        series.setdefault((r["implicator"], r["distance"]), []).append(
            (r["c"], r["avg_rule_conf"]))
    xs = sorted({c for pts in series.values() for c, _ in pts})

    width, height, margin = 640, 400, 50
    def sx(c):
        if len(xs) == 1:
            return width / 2
        return margin + (c - xs[0]) / (xs[-1] - xs[0]) * (width - 2 * margin)
    def sy(v):
        return height - margin - v * (height - 2 * margin)

    parts = []
    for i, ((implicator, distance), pts) in enumerate(sorted(series.items())):
        pts = sorted(pts)
        colour = _PALETTE[i % len(_PALETTE)]
        dash = "" if distance == "fuzzy" else ' stroke-dasharray="6,4"'
        points = " ".join(f"{sx(c):.1f},{sy(v):.1f}" for c, v in pts)
        parts.append(f'<polyline fill="none" stroke="{colour}"'
                     f' stroke-width="2"{dash} points="{points}"/>')
        parts.append(f'<text x="{width - margin + 4}" '
                     f'y="{sy(pts[-1][1]):.1f}" font-size="9" '
                     f'fill="{colour}">{implicator[:4]}/{distance[:1]}</text>')
    labels = [f'<text x="{sx(c):.1f}" y="{height - margin + 16}" '
              f'font-size="10" text-anchor="middle">{c}</text>' for c in xs]
    return _svg_shell(dataset, lam, parts, labels,
                      "average rule confidence vs number of symbols")


def _svg_shell(dataset, lam, body, x_labels, subtitle) -> str:
    width, height, margin = 640, 400, 50
    ticks = []
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = height - margin - v * (height - 2 * margin)
        ticks.append(f'<line x1="{margin}" y1="{y}" x2="{width - margin}" '
                     f'y2="{y}" stroke="#ddd"/>')
        ticks.append(f'<text x="{margin - 6}" y="{y + 3}" font-size="10" '
                     f'text-anchor="end">{v}</text>')
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<text x="{margin}" y="20" font-size="13">{dataset} '
        f'(lambda={lam})</text>'
        f'<text x="{margin}" y="34" font-size="10" fill="#555">{subtitle}</text>'
        + "".join(ticks) + "".join(body) + "".join(x_labels)
        + "</svg>"
    )


def write_sweep_artifacts(spec: SweepSpec, out_dir: str | Path,
                          svg: bool = True) -> list[dict]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(spec)
    with open(out_dir / "sweep.csv", "w", encoding="utf-8") as f:
        write_csv(rows, f)
    if svg:
        for dataset in {r["dataset"] for r in rows}:
            text = render_sweep_svg(rows, dataset)
            (out_dir / f"sweep_{dataset}.svg").write_text(text,
                                                          encoding="utf-8")
    return rows
