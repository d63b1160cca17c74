"""ARFF datasets: parsing, imputation, normalization, stratified splits.

Supported ARFF subset: ``@relation``, ``@attribute <name> numeric|real|integer``,
``@attribute <name> {v1,...,vn}``, ``@data`` with comma-separated rows, ``?`` for
missing values and ``%`` comment lines. Attribute and nominal names keep their
declared case; all lookups are case-insensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ParseError, ValidationError

NUMERIC = "numeric"
NOMINAL = "nominal"

_NUMERIC_TYPES = {"numeric", "real", "integer"}


@dataclass(frozen=True)
class FeatureSpec:
    """One dataset column: numeric, or nominal with an ordered value domain."""

    name: str
    kind: str
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL):
            raise ValidationError(f"unknown feature kind {self.kind!r}")
        if self.kind == NOMINAL:
            if not self.domain:
                raise ValidationError(f"nominal feature {self.name!r} has empty domain")
            lowered = [v.lower() for v in self.domain]
            if len(set(lowered)) != len(lowered):
                raise ValidationError(f"nominal feature {self.name!r} has duplicate domain values")

    def domain_index(self, value: str) -> int:
        lowered = value.lower()
        for i, v in enumerate(self.domain):
            if v.lower() == lowered:
                return i
        raise DomainError(f"value {value!r} not in domain of feature {self.name!r}")


@dataclass(eq=False)
class Dataset:
    """A parsed tabular dataset.

    ``values`` is a (k, |F|) float grid; nominal cells hold the index of the
    value in the declared domain. ``missing_mask`` marks cells that were ``?``
    in the source. ``normalization_ranges`` maps numeric feature names to the
    original (min, max) once :func:`normalize` has run, for inverse display.
    """

    relation_name: str
    features: list[FeatureSpec]
    class_index: int
    values: np.ndarray
    missing_mask: np.ndarray
    normalization_ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.n_rows < 1:
            raise ValidationError("dataset must contain at least one row")
        if self.class_feature.kind != NOMINAL:
            raise ValidationError("class feature must be nominal")
        names = [f.name.lower() for f in self.features]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate feature names")
        if self.missing_mask[:, self.class_index].any():
            raise ValidationError("class column contains missing values")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def class_feature(self) -> FeatureSpec:
        return self.features[self.class_index]

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self.class_feature.domain

    def feature_index(self, name: str) -> int:
        lowered = name.lower()
        for i, f in enumerate(self.features):
            if f.name.lower() == lowered:
                return i
        raise DomainError(f"unknown feature {name!r}")

    def feature(self, name: str) -> FeatureSpec:
        return self.features[self.feature_index(name)]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_index(name)]

    def non_class_features(self) -> list[FeatureSpec]:
        return [f for i, f in enumerate(self.features) if i != self.class_index]

    def numeric_features(self) -> list[FeatureSpec]:
        return [f for i, f in enumerate(self.features)
                if f.kind == NUMERIC and i != self.class_index]

    def class_label_of_row(self, row: int) -> str:
        return self.class_feature.domain[int(self.values[row, self.class_index])]

    def equals(self, other: "Dataset") -> bool:
        """Structural equality; numeric cells compared exactly, missing cells ignored."""
        if self.relation_name != other.relation_name:
            return False
        if self.features != other.features or self.class_index != other.class_index:
            return False
        if self.values.shape != other.values.shape:
            return False
        if not np.array_equal(self.missing_mask, other.missing_mask):
            return False
        present = ~self.missing_mask
        return bool(np.array_equal(self.values[present], other.values[present]))


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie strictly between 0 and 1")


_ATTR_RE = re.compile(r"@attribute\s+(?P<name>'[^']*'|\"[^\"]*\"|\S+)\s+(?P<type>.+)$",
                      re.IGNORECASE)


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _split_csv(line: str) -> list[str]:
    """Split a data row on commas, honoring single/double quotes."""
    out, buf, quote = [], [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    out.append("".join(buf).strip())
    return out


def parse_arff(text: str, class_attribute: str | None = None) -> Dataset:
    """Parse ARFF text into a Dataset.

    The class is the last nominal attribute unless ``class_attribute`` names
    another one. Raises ParseError with the offending line number for header
    problems, DomainError for undeclared nominal values, ValidationError for
    missing class values.
    """
    relation = None
    features: list[FeatureSpec] = []
    rows: list[list[str]] = []
    in_data = False
    data_lines: list[tuple[int, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            data_lines.append((lineno, line))
            continue
        lowered = line.lower()
        if lowered.startswith("@relation"):
            rest = line[len("@relation"):].strip()
            if not rest:
                raise ParseError("@relation requires a name", line=lineno)
            relation = _unquote(rest)
        elif lowered.startswith("@attribute"):
            m = _ATTR_RE.match(line)
            if not m:
                raise ParseError("malformed @attribute declaration", line=lineno)
            name = _unquote(m.group("name"))
            type_decl = m.group("type").strip()
            if type_decl.startswith("{"):
                if not type_decl.endswith("}"):
                    raise ParseError("unterminated nominal domain", line=lineno)
                domain = tuple(_unquote(v) for v in _split_csv(type_decl[1:-1]))
                if not all(domain):
                    raise ParseError("empty nominal value in domain", line=lineno)
                try:
                    features.append(FeatureSpec(name, NOMINAL, domain))
                except ValidationError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
            elif type_decl.lower() in _NUMERIC_TYPES:
                features.append(FeatureSpec(name, NUMERIC))
            else:
                raise ParseError(f"unsupported attribute type {type_decl!r}", line=lineno)
        elif lowered.startswith("@data"):
            in_data = True
        else:
            raise ParseError(f"unrecognized header line {line!r}", line=lineno)

    if relation is None:
        raise ParseError("missing @relation declaration")
    if not features:
        raise ParseError("no @attribute declarations")
    if not in_data:
        raise ParseError("missing @data section")
    if not data_lines:
        raise ParseError("empty @data section")

    if class_attribute is not None:
        class_index = None
        for i, f in enumerate(features):
            if f.name.lower() == class_attribute.lower():
                class_index = i
        if class_index is None:
            raise DomainError(f"class attribute {class_attribute!r} not declared")
        if features[class_index].kind != NOMINAL:
            raise ValidationError(f"class attribute {class_attribute!r} is not nominal")
    else:
        nominal_idx = [i for i, f in enumerate(features) if f.kind == NOMINAL]
        if not nominal_idx:
            raise ValidationError("no nominal attribute available as class")
        class_index = nominal_idx[-1]

    k = len(data_lines)
    values = np.zeros((k, len(features)))
    mask = np.zeros((k, len(features)), dtype=bool)
    for r, (lineno, line) in enumerate(data_lines):
        cells = _split_csv(line)
        if len(cells) != len(features):
            raise ParseError(
                f"row has {len(cells)} values, expected {len(features)}", line=lineno)
        for c, cell in enumerate(cells):
            if cell == "?":
                if c == class_index:
                    raise ValidationError(f"missing class value on line {lineno}")
                mask[r, c] = True
                values[r, c] = np.nan
            elif features[c].kind == NUMERIC:
                try:
                    values[r, c] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"bad numeric value {cell!r} for {features[c].name!r}",
                        line=lineno) from None
            else:
                values[r, c] = features[c].domain_index(cell)

    return Dataset(relation_name=relation, features=features,
                   class_index=class_index, values=values, missing_mask=mask)


def _format_numeric(v: float) -> str:
    return repr(float(v))


def serialize_arff(ds: Dataset) -> str:
    """Write a Dataset back to ARFF text (inverse of parse_arff)."""
    out = [f"@relation {ds.relation_name}"]
    for f in ds.features:
        if f.kind == NUMERIC:
            out.append(f"@attribute {f.name} numeric")
        else:
            out.append(f"@attribute {f.name} {{{','.join(f.domain)}}}")
    out.append("@data")
    for r in range(ds.n_rows):
        cells = []
        for c, f in enumerate(ds.features):
            if ds.missing_mask[r, c]:
                cells.append("?")
            elif f.kind == NUMERIC:
                cells.append(_format_numeric(ds.values[r, c]))
            else:
                cells.append(f.domain[int(ds.values[r, c])])
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def impute(ds: Dataset) -> Dataset:
    """Fill missing cells: numeric by the feature mean, nominal by the mode
    (ties resolved toward the first declared domain value)."""
    values = ds.values.copy()
    mask = ds.missing_mask
    warnings = list(ds.warnings)
    for c, f in enumerate(ds.features):
        col_missing = mask[:, c]
        if not col_missing.any():
            continue
        observed = values[~col_missing, c]
        if observed.size == 0:
            raise ValidationError(f"feature {f.name!r} has no observed values")
        if f.kind == NUMERIC:
            fill = float(observed.mean())
        else:
            counts = np.bincount(observed.astype(int), minlength=len(f.domain))
            fill = int(np.argmax(counts))
        values[col_missing, c] = fill
        warnings.append(f"imputed {int(col_missing.sum())} value(s) in {f.name!r}")
    return replace(ds, values=values,
                   missing_mask=np.zeros_like(mask), warnings=warnings)


def normalize(ds: Dataset) -> Dataset:
    """Min-max scale every numeric feature to [0, 1], recording the original
    ranges. Constant columns collapse to 0.0 with a recorded warning."""
    if ds.missing_mask.any():
        raise ValidationError("normalize requires an imputed dataset")
    values = ds.values.copy()
    ranges = dict(ds.normalization_ranges)
    warnings = list(ds.warnings)
    for c, f in enumerate(ds.features):
        if f.kind != NUMERIC:
            continue
        col = values[:, c]
        lo, hi = float(col.min()), float(col.max())
        ranges[f.name] = (lo, hi)
        if hi == lo:
            values[:, c] = 0.0
            warnings.append(f"constant numeric feature {f.name!r}; mapped to 0.0")
        else:
            values[:, c] = (col - lo) / (hi - lo)
    return replace(ds, values=values, normalization_ranges=ranges, warnings=warnings)


def _take_rows(ds: Dataset, idx: np.ndarray, warnings: list[str]) -> Dataset:
    return replace(ds, values=ds.values[idx].copy(),
                   missing_mask=ds.missing_mask[idx].copy(),
                   warnings=warnings)


def split(ds: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Deterministic stratified train/test split.

    The train side gets round(train_fraction * k) rows, allocated per class by
    largest remainder. Classes with fewer than two instances trigger a plain
    (non-stratified) shuffle with a recorded warning.
    """
    rng = np.random.default_rng(cfg.seed)
    k = ds.n_rows
    target = int(round(cfg.train_fraction * k))
    target = min(max(target, 1), k - 1)
    labels = ds.values[:, ds.class_index].astype(int)
    class_rows = [np.flatnonzero(labels == j) for j in range(len(ds.class_labels))]
    present = [rows for rows in class_rows if rows.size > 0]

    warnings: list[str] = []
    if any(rows.size < 2 for rows in present):
        warnings.append("a class has fewer than 2 instances; split is not stratified")
        perm = rng.permutation(k)
        train_idx = np.sort(perm[:target])
        test_idx = np.sort(perm[target:])
    else:
        quotas = []
        for rows in present:
            exact = cfg.train_fraction * rows.size
            quotas.append([int(np.floor(exact)), exact - np.floor(exact)])
        assigned = sum(q[0] for q in quotas)
        extras = target - assigned
        order = sorted(range(len(present)), key=lambda i: (-quotas[i][1], i))
        for i in order[:max(extras, 0)]:
            quotas[i][0] += 1
        train_parts = []
        for rows, (take, _) in zip(present, quotas):
            take = min(max(take, 0), rows.size)
            perm = rng.permutation(rows.size)
            train_parts.append(rows[perm[:take]])
        train_idx = np.sort(np.concatenate(train_parts)).astype(int)
        test_mask = np.ones(k, dtype=bool)
        test_mask[train_idx] = False
        test_idx = np.flatnonzero(test_mask)

    train = _take_rows(ds, train_idx, list(ds.warnings) + warnings)
    test = _take_rows(ds, test_idx, list(ds.warnings) + warnings)
    return train, test
