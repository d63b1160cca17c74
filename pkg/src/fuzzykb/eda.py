"""Chart-ready data series for exploratory questions.

Everything returns plain JSON-serializable dicts; rendering happens client
side (browser canvas or the CLI's SVG writer), keeping this package free of
plotting dependencies.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .dataset import NUMERIC, Dataset
from .errors import DomainError


def _numeric_column(ds: Dataset, feature: str) -> np.ndarray:
    f = ds.feature(feature)
    if f.kind != NUMERIC:
        raise DomainError(f"feature {feature!r} is not numeric")
    return ds.column(f.name)


def histogram_series(ds: Dataset, feature: str, bins: int = 10) -> dict:
    values = _numeric_column(ds, feature)
    counts, edges = np.histogram(values, bins=bins)
    return {
        "feature": ds.feature(feature).name,
        "edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
    }


def correlation_series(ds: Dataset, feature_x: str, feature_y: str) -> dict:
    x = _numeric_column(ds, feature_x)
    y = _numeric_column(ds, feature_y)
    r, p = stats.pearsonr(x, y)
    return {
        "feature_x": ds.feature(feature_x).name,
        "feature_y": ds.feature(feature_y).name,
        "x": [float(v) for v in x],
        "y": [float(v) for v in y],
        "r": float(r),
        "p": float(p),
    }


def correlation_matrix(ds: Dataset) -> dict:
    names = [f.name for f in ds.numeric_features()]
    if not names:
        raise DomainError("dataset has no numeric features")
    cols = np.column_stack([ds.column(n) for n in names])
    with np.errstate(invalid="ignore"):
        matrix = np.corrcoef(cols, rowvar=False)
    matrix = np.nan_to_num(matrix, nan=0.0)
    if matrix.ndim == 0:  # single feature
        matrix = matrix.reshape(1, 1)
    return {
        "features": names,
        "matrix": [[float(v) for v in row] for row in matrix],
    }
