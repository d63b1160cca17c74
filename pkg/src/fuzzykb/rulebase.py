"""Symbolic rule base: one fuzzy rule per instance, exportable to Prolog text.

Every clause has the shape::

    input(ID, [[term,conf], ..., [term,conf], RuleConf]) :- output([class, ClassConf]).

with the instance description as head and the predicted class as body; the
counterfactual query direction runs from desired output back to inputs, which
is why the clause is written that way. Terms and class labels are emitted as
lowercase atoms (non-alphanumerics become ``_``) and confidences with six
decimal places, so exports are diff-stable and loadable by a Prolog system.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, TextIO

from .dataset import NOMINAL, NUMERIC, Dataset, FeatureSpec
from .errors import DomainError, ParseError, ValidationError
from .granulation import FeatureGranulation, SymbolAssignment, assign_symbol
from .prediction import Prediction

if TYPE_CHECKING:
    from .scoring import ScoringConfig


@dataclass
class FuzzyRule:
    """One instance encoded symbolically.

    ``rule_confidence`` starts at 1.0 and is overwritten by scoring with the
    rule's membership in the lower approximation of its class region.
    """

    id: int
    antecedent: tuple[SymbolAssignment, ...]
    class_label: str
    class_confidence: float
    rule_confidence: float = 1.0


@dataclass
class KnowledgeBase:
    """The full rule set plus the vocabulary needed to query it."""

    rules: list[FuzzyRule]
    antecedent_features: list[FeatureSpec]
    class_domain: tuple[str, ...]
    granulations: dict[str, FeatureGranulation] = field(default_factory=dict)
    scoring_config: "ScoringConfig | None" = None
    relation_name: str = ""
    class_feature_name: str = "class"

    def __len__(self) -> int:
        return len(self.rules)

    def feature_names(self) -> list[str]:
        return [f.name for f in self.antecedent_features]

    def feature_position(self, name: str) -> int:
        lowered = name.lower()
        for i, f in enumerate(self.antecedent_features):
            if f.name.lower() == lowered:
                return i
        raise DomainError(f"unknown feature {name!r}")

    def canonical_feature(self, name: str) -> str:
        return self.antecedent_features[self.feature_position(name)].name

    def feature_terms(self, name: str) -> list[str]:
        f = self.antecedent_features[self.feature_position(name)]
        if f.kind == NOMINAL:
            return list(f.domain)
        g = self.granulations.get(f.name)
        if g is None:
            raise ValidationError(f"no granulation for numeric feature {f.name!r}")
        return list(g.terms)

    def canonical_term(self, feature: str, term: str) -> str:
        wanted = term.lower().replace(" ", "_").replace("-", "_")
        for t in self.feature_terms(feature):
            if t.lower() == wanted:
                return t
        raise DomainError(f"term {term!r} not valid for feature {feature!r}")

    def canonical_class(self, label: str) -> str:
        wanted = label.lower().replace(" ", "_")
        for c in self.class_domain:
            if c.lower() == wanted:
                return c
        raise DomainError(f"unknown class {label!r}")

    def rule_by_id(self, rule_id: int) -> FuzzyRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise DomainError(f"no rule with id {rule_id}")

    def rules_by_class(self) -> dict[str, list[FuzzyRule]]:
        groups: dict[str, list[FuzzyRule]] = {c: [] for c in self.class_domain}
        for r in self.rules:
            groups.setdefault(r.class_label, []).append(r)
        return groups

    def validate(self) -> None:
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate rule ids")
        if ids and sorted(ids) != list(range(len(ids))):
            raise ValidationError("rule ids are not dense")


def build_rules(ds: Dataset, grans: dict[str, FeatureGranulation],
                preds: list[Prediction]) -> KnowledgeBase:
    """Encode every dataset row as a fuzzy rule under the model's predictions.

    Numeric cells map to their best-matching term with its membership; nominal
    cells keep their value with confidence 1. Requires an imputed, normalized
    dataset and one aligned prediction per row.
    """
    if ds.missing_mask.any():
        raise ValidationError("dataset must be imputed before building rules")
    if len(preds) != ds.n_rows:
        raise ValidationError(f"{len(preds)} predictions for {ds.n_rows} rows")
    for i, p in enumerate(preds):
        if p.instance_id != i:
            raise ValidationError(f"prediction ids misaligned at position {i}")

    positions = [i for i in range(len(ds.features)) if i != ds.class_index]
    ante_features = [ds.features[i] for i in positions]
    for f in ante_features:
        if f.kind == NUMERIC and f.name not in grans:
            raise ValidationError(f"missing granulation for feature {f.name!r}")

    rules = []
    for row in range(ds.n_rows):
        cells = []
        for i in positions:
            f = ds.features[i]
            v = ds.values[row, i]
            if f.kind == NUMERIC:
                cells.append(assign_symbol(grans[f.name], v))
            else:
                cells.append(SymbolAssignment(f.domain[int(v)], 1.0))
        rules.append(FuzzyRule(
            id=row,
            antecedent=tuple(cells),
            class_label=preds[row].class_label,
            class_confidence=preds[row].confidence,
        ))

    kb = KnowledgeBase(
        rules=rules,
        antecedent_features=ante_features,
        class_domain=ds.class_labels,
        granulations=dict(grans),
        relation_name=ds.relation_name,
        class_feature_name=ds.class_feature.name,
    )
    kb.validate()
    return kb


def mangle_atom(name: str) -> str:
    """Lowercase and map every non-alphanumeric character to underscore."""
    return re.sub(r"[^a-z0-9]", "_", name.lower())


def _clause(rule: FuzzyRule) -> str:
    pairs = [f"[{mangle_atom(a.term)},{a.confidence:.6f}]" for a in rule.antecedent]
    body = ", ".join(pairs + [f"{rule.rule_confidence:.6f}"])
    return (f"input({rule.id}, [{body}]) :- "
            f"output([{mangle_atom(rule.class_label)},{rule.class_confidence:.6f}]).")


def export_prolog(kb: KnowledgeBase, sink: TextIO) -> None:
    """Write the scored knowledge base as Prolog clauses, ordered by rule id."""
    if kb.rules and kb.scoring_config is None:
        raise ValidationError("knowledge base must be scored before export")
    sink.write("% fuzzy symbolic knowledge base\n")
    if kb.relation_name:
        sink.write(f"% relation: {kb.relation_name}\n")
    if kb.class_domain:
        sink.write(f"% classes: {', '.join(mangle_atom(c) for c in kb.class_domain)}\n")
    if kb.antecedent_features:
        sink.write(f"% features: {', '.join(f.name for f in kb.antecedent_features)}\n")
    for name, g in kb.granulations.items():
        protos = ",".join(repr(p) for p in g.prototypes)
        sink.write(f"% granulation {name}: terms={','.join(g.terms)} "
                   f"fuzziness={g.fuzziness!r} prototypes={protos}\n")
    if kb.scoring_config is not None:
        c = kb.scoring_config
        sink.write(f"% scoring: implicator={c.implicator} distance={c.distance} "
                   f"lambda={c.smoothing!r}\n")
    for rule in sorted(kb.rules, key=lambda r: r.id):
        sink.write(_clause(rule) + "\n")


def export_prolog_str(kb: KnowledgeBase) -> str:
    buf = io.StringIO()
    export_prolog(kb, buf)
    return buf.getvalue()


_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(?:\.\d+)?) |
    (?P<atom>[A-Za-z_][A-Za-z0-9_]*) |
    (?P<neck>:-) |
    (?P<punct>[()\[\],.])
""", re.VERBOSE)


def _tokenize(text: str) -> list[str]:
    tokens = []
    for line in text.splitlines():
        line = line.split("%", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(line, pos)
            if not m:
                raise ParseError(f"unexpected character {line[pos]!r}")
            tokens.append(m.group(0))
            pos = m.end()
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[str], clause_index: int):
        self.tokens = tokens
        self.pos = 0
        self.clause_index = clause_index

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"clause {self.clause_index}: unexpected end of input")
        if expected is not None and tok != expected:
            raise ParseError(
                f"clause {self.clause_index}: expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def number(self) -> float:
        tok = self.take()
        try:
            return float(tok)
        except ValueError:
            raise ParseError(
                f"clause {self.clause_index}: expected number, got {tok!r}") from None


def _parse_header(text: str) -> tuple[str, tuple[str, ...]]:
    relation, classes = "", ()
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("% relation:"):
            relation = line.split(":", 1)[1].strip()
        elif line.startswith("% classes:"):
            classes = tuple(v.strip() for v in line.split(":", 1)[1].split(","))
    return relation, classes


def parse_prolog_kb(text: str) -> KnowledgeBase:
    """Parse clauses produced by :func:`export_prolog` back into rules.

    The result carries rules only (no granulations); confidences are exact to
    the six printed decimals. Raises ParseError with the clause index on any
    grammar or arity violation.
    """
    relation, header_classes = _parse_header(text)
    tokens = _tokenize(text)
    rules: list[FuzzyRule] = []
    seen_classes: list[str] = []
    arity: int | None = None
    stream = _TokenStream(tokens, clause_index=0)

    def check_conf(v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ParseError(
                f"clause {stream.clause_index}: confidence {v} outside [0, 1]")
        return v

    while stream.peek() is not None:
        stream.clause_index = len(rules)
        stream.take("input")
        stream.take("(")
        rule_id = int(stream.number())
        stream.take(",")
        stream.take("[")
        antecedent: list[SymbolAssignment] = []
        rule_conf: float | None = None
        while True:
            tok = stream.peek()
            if tok == "[":
                stream.take("[")
                term = stream.take()
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", term):
                    raise ParseError(
                        f"clause {stream.clause_index}: bad term atom {term!r}")
                stream.take(",")
                conf = check_conf(stream.number())
                stream.take("]")
                antecedent.append(SymbolAssignment(term, conf))
                stream.take(",")
            else:
                rule_conf = check_conf(stream.number())
                stream.take("]")
                break
        stream.take(")")
        stream.take(":-")
        stream.take("output")
        stream.take("(")
        stream.take("[")
        class_label = stream.take()
        stream.take(",")
        class_conf = check_conf(stream.number())
        stream.take("]")
        stream.take(")")
        stream.take(".")

        if arity is None:
            arity = len(antecedent)
        elif len(antecedent) != arity:
            raise ParseError(
                f"clause {stream.clause_index}: expected {arity} antecedent "
                f"terms, got {len(antecedent)}")
        if class_label not in seen_classes:
            seen_classes.append(class_label)
        rules.append(FuzzyRule(
            id=rule_id,
            antecedent=tuple(antecedent),
            class_label=class_label,
            class_confidence=class_conf,
            rule_confidence=rule_conf,
        ))

    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate rule ids in knowledge base")
    class_domain = header_classes if header_classes else tuple(seen_classes)
    return KnowledgeBase(rules=rules, antecedent_features=[],
                         class_domain=class_domain, relation_name=relation)


def kb_to_json(kb: KnowledgeBase) -> str:
    """Full-fidelity JSON form of a knowledge base (exact float round-trip)."""
    import json

    doc = {
        "version": 1,
        "relation": kb.relation_name,
        "class_feature": kb.class_feature_name,
        "class_domain": list(kb.class_domain),
        "features": [
            {"name": f.name, "kind": f.kind, "domain": list(f.domain)}
            for f in kb.antecedent_features
        ],
        "granulations": {
            name: {"prototypes": list(g.prototypes), "terms": list(g.terms),
                   "fuzziness": g.fuzziness}
            for name, g in kb.granulations.items()
        },
        "scoring": None if kb.scoring_config is None else {
            "implicator": kb.scoring_config.implicator,
            "distance": kb.scoring_config.distance,
            "lambda": kb.scoring_config.smoothing,
        },
        "rules": [
            {"id": r.id,
             "antecedent": [[a.term, a.confidence] for a in r.antecedent],
             "class": r.class_label,
             "class_confidence": r.class_confidence,
             "rule_confidence": r.rule_confidence}
            for r in kb.rules
        ],
    }
    return json.dumps(doc, indent=2)


def kb_from_json(text: str) -> KnowledgeBase:
    import json

    from .scoring import ScoringConfig

    doc = json.loads(text)
    features = [FeatureSpec(f["name"], f["kind"], tuple(f["domain"]))
                for f in doc["features"]]
    grans = {
        name: FeatureGranulation(
            feature=name, prototypes=tuple(entry["prototypes"]),
            terms=tuple(entry["terms"]), fuzziness=float(entry["fuzziness"]))
        for name, entry in doc["granulations"].items()
    }
    scoring = doc.get("scoring")
    cfg = None
    if scoring is not None:
        cfg = ScoringConfig(implicator=scoring["implicator"],
                            distance=scoring["distance"],
                            smoothing=float(scoring["lambda"]))
    rules = [
        FuzzyRule(
            id=int(r["id"]),
            antecedent=tuple(SymbolAssignment(t, float(c))
                             for t, c in r["antecedent"]),
            class_label=r["class"],
            class_confidence=float(r["class_confidence"]),
            rule_confidence=float(r["rule_confidence"]),
        )
        for r in doc["rules"]
    ]
    return KnowledgeBase(
        rules=rules, antecedent_features=features,
        class_domain=tuple(doc["class_domain"]), granulations=grans,
        scoring_config=cfg, relation_name=doc.get("relation", ""),
        class_feature_name=doc.get("class_feature", "class"),
    )
