"""Fuzzy c-means granulation of numeric features into ordered linguistic terms.

Each numeric feature is clustered independently on its normalized [0, 1]
values; cluster centers are sorted ascending and paired with an ordered label
list, so term order always follows prototype order. Fits are deterministic:
prototypes are initialized at evenly spaced quantiles of the data, and the
alternating membership/prototype updates involve no randomness. Per-feature
fits are independent of each other and safe to run in parallel.

Clustering runs in one dimension. Embedding every value x as the symmetric
pair (x, x) would scale all pairwise distances by the same factor sqrt(2),
which cancels in the membership ratios, so the 1-D computation yields the
same memberships.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import NUMERIC, Dataset
from .errors import ConfigError, EngineWarning, ValidationError

DEFAULT_FUZZINESS = 2.0
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 300

# Fixed label ladder per cluster count, so exports are stable across runs.
# c=1 only occurs when a feature has a single distinct value.
_TERM_TABLE: dict[int, tuple[str, ...]] = {
    1: ("medium",),
    2: ("low", "high"),
    3: ("low", "medium", "high"),
    4: ("low", "medium_low", "medium_high", "high"),
    5: ("very_low", "low", "medium", "high", "very_high"),
    6: ("very_low", "low", "medium_low", "medium_high", "high", "very_high"),
    7: ("very_low", "low", "medium_low", "medium", "medium_high", "high", "very_high"),
    8: ("extremely_low", "very_low", "low", "medium_low",
        "medium_high", "high", "very_high", "extremely_high"),
    9: ("extremely_low", "very_low", "low", "medium_low", "medium",
        "medium_high", "high", "very_high", "extremely_high"),
    10: ("ultra_low", "extremely_low", "very_low", "low", "medium_low",
         "medium_high", "high", "very_high", "extremely_high", "ultra_high"),
    11: ("ultra_low", "extremely_low", "very_low", "low", "medium_low", "medium",
         "medium_high", "high", "very_high", "extremely_high", "ultra_high"),
}


def default_terms(c: int) -> list[str]:
    """Ordered linguistic labels for c clusters (2 <= c <= 11)."""
    if c not in _TERM_TABLE or c < 2:
        raise ConfigError(f"no label set for {c} clusters (supported: 2..11)")
    return list(_TERM_TABLE[c])


@dataclass(frozen=True)
class FcmConfig:
    n_clusters: int = 5
    fuzziness: float = DEFAULT_FUZZINESS
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ConfigError("n_clusters must be at least 2")
        if self.fuzziness <= 1.0:
            raise ConfigError("fuzziness must be strictly greater than 1")
        if self.tol <= 0.0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")


@dataclass(frozen=True)
class SymbolAssignment:
    """A linguistic term together with the membership that backs it."""

    term: str
    confidence: float


@dataclass(frozen=True)
class FeatureGranulation:
    """Fitted fuzzy partition of one numeric feature."""

    feature: str
    prototypes: tuple[float, ...]
    terms: tuple[str, ...]
    fuzziness: float

    def __post_init__(self):
        if len(self.prototypes) != len(self.terms):
            raise ValidationError("prototypes and terms must have equal length")
        if any(b <= a for a, b in zip(self.prototypes, self.prototypes[1:])):
            raise ValidationError("prototypes must be strictly ascending")

    def memberships(self, x: float) -> np.ndarray:
        """Membership of x to every cluster (sums to 1; one-hot at a prototype)."""
        return _memberships(np.asarray([float(x)]), np.asarray(self.prototypes),
                            self.fuzziness)[0]


def _memberships(values: np.ndarray, prototypes: np.ndarray, m: float) -> np.ndarray:
    """(k, c) membership matrix; rows with a zero distance become one-hot."""
    dist = np.abs(values[:, None] - prototypes[None, :])
    expo = 2.0 / (m - 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        weights = dist ** (-expo)
    u = np.empty_like(weights)
    singular = ~np.isfinite(weights).all(axis=1)
    regular = ~singular
    if regular.any():
        w = weights[regular]
        u[regular] = w / w.sum(axis=1, keepdims=True)
    if singular.any():
        u[singular] = 0.0
        hits = np.argmin(dist[singular], axis=1)
        u[np.flatnonzero(singular), hits] = 1.0
    return u


def fit_fcm(values, cfg: FcmConfig, feature: str = "",
            terms: list[str] | None = None) -> FeatureGranulation:
    """Cluster one feature's normalized values into an ordered fuzzy partition.

    Prototypes start at evenly spaced quantiles and alternate with membership
    updates until the largest prototype displacement drops below ``cfg.tol``
    or ``cfg.max_iter`` is reached. If the data has fewer distinct values than
    requested clusters, the cluster count is reduced with a warning.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("values must be a non-empty 1-D sequence")
    if np.nanmin(x) < 0.0 or np.nanmax(x) > 1.0 or np.isnan(x).any():
        raise ValidationError("values must lie in [0, 1] with no gaps")

    c = cfg.n_clusters
    distinct = np.unique(x).size
    if distinct < c:
        warnings.warn(
            f"feature {feature!r}: {distinct} distinct value(s) < {c} clusters; "
            f"reducing cluster count", EngineWarning, stacklevel=2)
        c = distinct

    z = np.quantile(x, (np.arange(c) + 0.5) / c)
    for _ in range(cfg.max_iter):
        u = _memberships(x, z, cfg.fuzziness)
        um = u ** cfg.fuzziness
        denom = um.sum(axis=0)
        # A cluster that lost all weight keeps its position.
        z_new = np.where(denom > 0.0, (um * x[:, None]).sum(axis=0)
                         / np.where(denom > 0.0, denom, 1.0), z)
        shift = np.abs(z_new - z).max()
        z = z_new
        if shift < cfg.tol:
            break

    # Strictly increasing prototypes: nudge coincident centers apart by rank.
    ranks = np.empty(c, dtype=int)
    ranks[np.argsort(z, kind="stable")] = np.arange(c)
    z = np.sort(z + 1e-9 * ranks)

    labels = list(terms) if terms is not None else (
        default_terms(c) if c >= 2 else list(_TERM_TABLE[1]))
    if len(labels) != c:
        labels = default_terms(c) if c >= 2 else list(_TERM_TABLE[1])
    return FeatureGranulation(feature=feature, prototypes=tuple(float(v) for v in z),
                              terms=tuple(labels), fuzziness=cfg.fuzziness)


def assign_symbol(g: FeatureGranulation, x: float) -> SymbolAssignment:
    """Map a normalized value to the term with maximal membership.

    Values outside [0, 1] are clamped with a warning; exact membership ties
    resolve to the lower-ordered term.
    """
    x = float(x)
    if x < 0.0 or x > 1.0:
        warnings.warn(f"value {x} outside [0, 1]; clamping", EngineWarning,
                      stacklevel=2)
        x = min(max(x, 0.0), 1.0)
    u = g.memberships(x)
    best = int(np.argmax(u))
    return SymbolAssignment(term=g.terms[best], confidence=float(u[best]))


def granulate_dataset(ds: Dataset, cfg: FcmConfig) -> dict[str, FeatureGranulation]:
    """Fit one granulation per numeric non-class feature of a normalized dataset."""
    grans: dict[str, FeatureGranulation] = {}
    for i, f in enumerate(ds.features):
        if f.kind != NUMERIC or i == ds.class_index:
            continue
        grans[f.name] = fit_fcm(ds.values[:, i], cfg, feature=f.name)
    return grans


def granulations_to_json(grans: dict[str, FeatureGranulation]) -> str:
    doc = {
        "version": 1,
        "features": {
            name: {
                "prototypes": list(g.prototypes),
                "terms": list(g.terms),
                "fuzziness": g.fuzziness,
            }
            for name, g in grans.items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def granulations_from_json(text: str) -> dict[str, FeatureGranulation]:
    doc = json.loads(text)
    return {
        name: FeatureGranulation(
            feature=name,
            prototypes=tuple(entry["prototypes"]),
            terms=tuple(entry["terms"]),
            fuzziness=float(entry["fuzziness"]),
        )
        for name, entry in doc["features"].items()
    }
