"""Per-instance class predictions: external CSV ingestion and a k-NN baseline.

The engine is agnostic about where predictions come from. The primary path is
a CSV produced by any external model (``id,class,confidence``, ids 0-based in
dataset row order). The built-in baseline exists so the pipeline runs end to
end without external files.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import NUMERIC, Dataset
from .errors import DomainError, EngineWarning, IngestionError, ValidationError


@dataclass(frozen=True)
class Prediction:
    instance_id: int
    class_label: str
    confidence: float


def ingest_predictions(ds: Dataset, source: str) -> list[Prediction]:
    """Read one prediction per dataset row from CSV text.

    Raises IngestionError on missing/duplicate ids, DomainError on labels
    outside the class domain. Confidences are clamped to [0, 1] with a warning.
    """
    reader = csv.reader(io.StringIO(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestionError("empty prediction stream") from None
    if [h.strip().lower() for h in header] != ["id", "class", "confidence"]:
        raise IngestionError(f"expected header 'id,class,confidence', got {header!r}")

    class_feature = ds.class_feature
    seen: dict[int, Prediction] = {}
    for record in reader:
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != 3:
            raise IngestionError(f"record {record!r} does not have 3 fields")
        try:
            instance_id = int(record[0])
        except ValueError:
            raise IngestionError(f"bad id {record[0]!r}") from None
        label = class_feature.domain[class_feature.domain_index(record[1].strip())]
        try:
            conf = float(record[2])
        except ValueError:
            raise IngestionError(f"bad confidence {record[2]!r}") from None
        if conf < 0.0 or conf > 1.0:
            warnings.warn(f"confidence {conf} for id {instance_id} clamped to [0, 1]",
                          EngineWarning, stacklevel=2)
            conf = min(max(conf, 0.0), 1.0)
        if instance_id in seen:
            raise IngestionError(f"duplicate id {instance_id}")
        seen[instance_id] = Prediction(instance_id, label, conf)

    missing = [i for i in range(ds.n_rows) if i not in seen]
    if missing:
        raise IngestionError(f"missing prediction for id(s) {missing[:5]}"
                             + ("..." if len(missing) > 5 else ""))
    extra = [i for i in seen if not 0 <= i < ds.n_rows]
    if extra:
        raise IngestionError(f"prediction id(s) outside dataset: {sorted(extra)[:5]}")
    return [seen[i] for i in range(ds.n_rows)]


def emit_predictions(preds: list[Prediction]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "class", "confidence"])
    for p in preds:
        writer.writerow([p.instance_id, p.class_label, repr(p.confidence)])
    return out.getvalue()


def _feature_distances(train: Dataset, target: Dataset) -> np.ndarray:
    """(n_target, n_train) distance matrix: |diff| on numerics, 0/1 on nominals."""
    n, t = target.n_rows, train.n_rows
    dist = np.zeros((n, t))
    for i, f in enumerate(train.features):
        if i == train.class_index:
            continue
        a = target.values[:, i][:, None]
        b = train.values[:, i][None, :]
        if f.kind == NUMERIC:
            dist += np.abs(a - b)
        else:
            dist += (a != b).astype(float)
    return dist


def baseline_classify(train: Dataset, target: Dataset, k: int = 5) -> list[Prediction]:
    """k-nearest-neighbor vote over normalized features.

    Confidence is the winning class's vote fraction. Ties in distance keep
    the earlier training row; ties in votes keep the class declared first.
    """
    if train.n_rows < 1:
        raise ValidationError("training dataset is empty")
    if k < 1:
        raise ValidationError("k must be at least 1")
    if k > train.n_rows:
        warnings.warn(f"k={k} larger than training set; using {train.n_rows}",
                      EngineWarning, stacklevel=2)
        k = train.n_rows

    dist = _feature_distances(train, target)
    train_labels = train.values[:, train.class_index].astype(int)
    n_classes = len(train.class_labels)
    preds = []
    for row in range(target.n_rows):
        order = np.argsort(dist[row], kind="stable")[:k]
        votes = np.bincount(train_labels[order], minlength=n_classes)
        winner = int(np.argmax(votes))
        preds.append(Prediction(
            instance_id=row,
            class_label=train.class_labels[winner],
            confidence=float(votes[winner]) / k,
        ))
    return preds


def accuracy(preds: list[Prediction], truth: Dataset) -> float:
    """Fraction of predictions whose label matches the dataset's class column."""
    if len(preds) != truth.n_rows:
        raise ValidationError(
            f"{len(preds)} predictions for {truth.n_rows} rows")
    correct = 0
    for p in preds:
        if not 0 <= p.instance_id < truth.n_rows:
            raise ValidationError(f"prediction id {p.instance_id} out of range")
        if p.class_label.lower() == truth.class_label_of_row(p.instance_id).lower():
            correct += 1
    return correct / len(preds)
