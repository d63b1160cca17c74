"""Deterministic natural-language layer: intent grammar and reply templates.

Intent classification and entity extraction run over a fixed, versioned rule
table (``grammar.json``) instead of a trained model, so the same utterance
always produces the same parse. Feature, term, and class tokens are matched
case-insensitively against the live schema vocabulary; multiword linguistic
values ("very low") normalize to their canonical underscore form. Utterances
that match nothing yield a rejection with the nearest known phrasing, never an
exception.
"""

from __future__ import annotations

import difflib
import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .dataset import NOMINAL, Dataset
from .rulebase import FuzzyRule, KnowledgeBase

ENTITY_NAMES = frozenset({
    "dataset", "variable", "value", "known_concept", "unknown_concept",
    "outcome", "n_estimators", "max_depth", "top_n",
})

_STOPWORDS = frozenset("""
a an and are be can could do does for from have how i if in instead is it let
me more my of on one or please pretty rule rules see should show so take taken
tell that the then this to values was what which while will with you your
""".split())


def _load_grammar() -> dict:
    text = resources.files("fuzzykb").joinpath("grammar.json").read_text("utf-8")
    return json.loads(text)


_GRAMMAR = _load_grammar()
_INTENTS = [(entry["name"],
             [re.compile(p, re.IGNORECASE) for p in entry["patterns"]],
             entry["example"])
            for entry in _GRAMMAR["intents"]]
_SYNONYMS = {canon: variants for canon, variants in _GRAMMAR["synonyms"].items()}


@dataclass(frozen=True)
class Intent:
    name: str
    entities: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.entities) - ENTITY_NAMES
        if unknown:
            raise ValueError(f"illegal entity names: {sorted(unknown)}")

    def first(self, entity: str) -> str | None:
        values = self.entities.get(entity, [])
        return values[0] if values else None


@dataclass(frozen=True)
class ParseOutcome:
    intent: Intent | None
    rejected: bool = False
    confidence: str = "exact"  # "exact" | "fuzzy_match"
    unrecognized_tokens: tuple[str, ...] = ()
    suggestion: str | None = None


@dataclass(frozen=True)
class SchemaView:
    """The vocabulary the parser is allowed to recognize."""

    features: tuple[str, ...] = ()
    terms: dict[str, tuple[str, ...]] = field(default_factory=dict)
    classes: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.features and not self.classes

    def term_union(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for vocab in self.terms.values():
            for t in vocab:
                seen.setdefault(t.lower(), None)
        return tuple(seen)

    @classmethod
    def empty(cls) -> "SchemaView":
        return cls()

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "SchemaView":
        features = tuple(f.name for f in ds.non_class_features())
        terms = {f.name.lower(): tuple(v.lower() for v in f.domain)
                 for f in ds.non_class_features() if f.kind == NOMINAL}
        return cls(features=features, terms=terms,
                   classes=tuple(c.lower() for c in ds.class_labels))

    @classmethod
    def from_kb(cls, kb: KnowledgeBase) -> "SchemaView":
        features = tuple(kb.feature_names())
        terms = {name.lower(): tuple(t.lower() for t in kb.feature_terms(name))
                 for name in features}
        return cls(features=features, terms=terms,
                   classes=tuple(c.lower() for c in kb.class_domain))


def _apply_synonyms(text: str) -> tuple[str, bool]:
    replaced = False
    for canon, variants in _SYNONYMS.items():
        pattern = r"\b(" + "|".join(re.escape(v) for v in variants) + r")\b"
        new = re.sub(pattern, canon, text)
        if new != text:
            replaced = True
            text = new
    return text, replaced


def _term_alternation(vocab: tuple[str, ...]) -> str:
    forms = sorted((re.escape(t).replace("_", "[ _-]") for t in vocab),
                   key=len, reverse=True)
    return "|".join(forms)


def _normalize_term(term: str) -> str:
    return re.sub(r"[ \-]+", "_", term.strip().lower())


def _scan_features(text: str, schema: SchemaView,
                   span: tuple[int, int] | None = None) -> list[str]:
    """Schema features mentioned in the text (or a slice of it), in order."""
    lo, hi = span if span else (0, len(text))
    region = text[lo:hi]
    hits: list[tuple[int, str]] = []
    for name in sorted(schema.features, key=len, reverse=True):
        for m in re.finditer(rf"\b{re.escape(name)}\b", region, re.IGNORECASE):
            hits.append((m.start(), name.lower()))
    hits.sort()
    out, seen = [], set()
    for _, name in hits:
        if name not in seen:
            seen.add(name)
            out.append(name)
    return out


def _scan_bindings(text: str, schema: SchemaView) -> list[tuple[str, str]]:
    """All "<feature> is <term>" pairs, in utterance order."""
    union = schema.term_union()
    pairs: list[tuple[int, str, str]] = []
    for name in schema.features:
        vocab = schema.terms.get(name.lower(), union)
        if not vocab:
            continue
        alt = _term_alternation(vocab)
        if not alt:
            continue
        pattern = rf"\b{re.escape(name)}\s+is\s+(?P<term>{alt})\b"
        for m in re.finditer(pattern, text, re.IGNORECASE):
            pairs.append((m.start(), name.lower(), _normalize_term(m.group("term"))))
    pairs.sort()
    return [(f, t) for _, f, t in pairs]


def _scan_outcomes(text: str) -> tuple[str | None, str | None]:
    desired = None
    m = re.search(r"\boutcome\s+(?:to\s+be|is|was|should\s+be|be)\s+"
                  r"([A-Za-z0-9_\-]+)", text, re.IGNORECASE)
    if m:
        desired = m.group(1).lower()
    contrast = None
    m = re.search(r"\binstead\s+of\s+([A-Za-z0-9_\-]+)", text, re.IGNORECASE)
    if m:
        contrast = m.group(1).lower()
    return desired, contrast


def _unrecognized(text: str, schema: SchemaView) -> tuple[str, ...]:
    known = {f.lower() for f in schema.features}
    known |= {t for t in schema.term_union()}
    known |= {c.lower() for c in schema.classes}
    extra_term_words = {w for t in schema.term_union() for w in t.split("_")}
    out = []
    for token in re.findall(r"[A-Za-z_][A-Za-z0-9_\-]*", text):
        low = token.lower()
        if low in _STOPWORDS or low in known or low in extra_term_words:
            continue
        if low in ("outcome", "certainty", "variables"):
            continue
        out.append(low)
    return tuple(dict.fromkeys(out))


def _extract_load_data(text: str, schema: SchemaView) -> dict[str, list[str]]:
    m = re.search(r"\bload\s+(?:the\s+)?([A-Za-z0-9_\-]+?)(?:\s+dataset)?\s*[.!?]*$",
                  text, re.IGNORECASE)
    if not m:
        m = re.search(r"\bload\s+(?:the\s+)?([A-Za-z0-9_\-]+)", text, re.IGNORECASE)
    return {"dataset": [m.group(1).lower()]} if m else {}


def _extract_variables(text: str, schema: SchemaView) -> dict[str, list[str]]:
    found = _scan_features(text, schema)
    return {"variable": found} if found else {}


def _extract_train_model(text: str, schema: SchemaView) -> dict[str, list[str]]:
    entities: dict[str, list[str]] = {}
    m = re.search(r"max(?:imum)?\s*_?\s*depth(?:\s+of)?\s*[=:]?\s*(\d+)",
                  text, re.IGNORECASE)
    if m:
        entities["max_depth"] = [m.group(1)]
    m = re.search(r"(\d+)\s+estimators?\b", text, re.IGNORECASE) or \
        re.search(r"n_?estimators\s*[=:of]*\s*(\d+)", text, re.IGNORECASE)
    if m:
        entities["n_estimators"] = [m.group(1)]
    return entities


def _extract_top_n(text: str, schema: SchemaView) -> dict[str, list[str]]:
    m = re.search(r"\btop\s+(\d+)", text, re.IGNORECASE)
    return {"top_n": [m.group(1)]} if m else {}


def _extract_full_query(text: str, schema: SchemaView) -> dict[str, list[str]]:
    entities: dict[str, list[str]] = {}
    pairs = _scan_bindings(text, schema)
    if pairs:
        entities["known_concept"] = [f for f, _ in pairs]
        entities["value"] = [t for _, t in pairs]
    desired, _ = _scan_outcomes(text)
    if desired:
        entities["outcome"] = [desired]
    m = re.search(r"\bwhat\s+(?:is|are)\s+(.+?)\s*\??$", text, re.IGNORECASE)
    if m:
        unknowns = _scan_features(text, schema, span=m.span(1))
        known = set(entities.get("known_concept", []))
        unknowns = [f for f in unknowns if f not in known]
        if unknowns:
            entities["unknown_concept"] = unknowns
    return entities


def _extract_cf_query(text: str, schema: SchemaView) -> dict[str, list[str]]:
    entities: dict[str, list[str]] = {}
    m = re.search(r"\bshould\s+(.+?)\s+(?:take|have\s+taken)\b", text,
                  re.IGNORECASE)
    unknowns: list[str] = []
    if m:
        unknowns = _scan_features(text, schema, span=m.span(1))
    if unknowns:
        entities["unknown_concept"] = unknowns
    pairs = [(f, t) for f, t in _scan_bindings(text, schema) if f not in unknowns]
    if pairs:
        entities["known_concept"] = [f for f, _ in pairs]
        entities["value"] = [t for _, t in pairs]
    desired, contrast = _scan_outcomes(text)
    if desired:
        # outcome carries [desired] or [desired, contrast]; order is the contract
        entities["outcome"] = [desired] + ([contrast] if contrast else [])
    return entities


_EXTRACTORS = {
    "load_data": _extract_load_data,
    "plot_histogram": _extract_variables,
    "plot_correlation": _extract_variables,
    "bias": _extract_variables,
    "train_model": _extract_train_model,
    "top_rules_kb": _extract_top_n,
    "run_full_query": _extract_full_query,
    "run_cf_query": _extract_cf_query,
}

_QUERY_INTENTS = {"run_full_query", "run_cf_query"}


def parse(text: str, schema: SchemaView) -> ParseOutcome:
    """Classify an utterance and extract its entities against a schema.

    Total and deterministic: anything unparseable becomes a rejection outcome
    carrying the closest supported phrasing as a suggestion.
    """
    normalized, replaced = _apply_synonyms(text.lower())
    confidence = "fuzzy_match" if replaced else "exact"

    matched: str | None = None
    for name, patterns, _ in _INTENTS:
        if any(p.search(normalized) for p in patterns):
            matched = name
            break

    if matched is None:
        examples = [ex for _, _, ex in _INTENTS]
        close = difflib.get_close_matches(text, examples, n=1, cutoff=0.0)
        return ParseOutcome(intent=None, rejected=True, confidence=confidence,
                            unrecognized_tokens=_unrecognized(normalized, schema),
                            suggestion=close[0] if close else None)

    if schema.is_empty and matched not in ("load_data", "help"):
        return ParseOutcome(
            intent=None, rejected=True, confidence=confidence,
            suggestion="Load the diabetes dataset")

    extractor = _EXTRACTORS.get(matched)
    entities = extractor(normalized, schema) if extractor else {}
    tokens = (_unrecognized(normalized, schema)
              if matched in _QUERY_INTENTS else ())
    return ParseOutcome(intent=Intent(matched, entities), confidence=confidence,
                        unrecognized_tokens=tokens)


# ---------------------------------------------------------------------------
# Reply rendering


def _join_names(names: list[str]) -> str:
    if len(names) <= 1:
        return "".join(names)
    if len(names) == 2:
        return f"{names[0]} and {names[1]}"
    return ", ".join(names[:-1]) + f", and {names[-1]}"


def display_term(term: str) -> str:
    return term.replace("_", " ")


def rule_sentence(kb: KnowledgeBase, rule: FuzzyRule) -> str:
    """Render a rule as an IF ... THEN sentence using declared feature names."""
    parts = []
    for f, cell in zip(kb.antecedent_features, rule.antecedent):
        shown = display_term(cell.term) if f.kind != NOMINAL else cell.term
        parts.append(f"{f.name} is {shown}")
    return (f"If {', '.join(parts)}, then {kb.class_feature_name} "
            f"is {rule.class_label}.")


def _render_query_reply(payload: dict, verb: str) -> str:
    if not payload.get("solutions"):
        hint = ""
        nearest = payload.get("nearest_candidate")
        if nearest is not None:
            rule_id, mismatches = nearest
            hint = (f" The closest candidate is rule {rule_id}, which differs "
                    f"from your known values on {mismatches} feature(s).")
        elif payload.get("no_class_rules"):
            hint = " No rule in the knowledge base predicts that outcome."
        return "I could not find any rule matching your query." + hint
    top = payload["solutions"][0]
    parts = [
        f"{b['feature']} {verb} {display_term(b['term'])}, "
        f"with a certainty of {b['confidence']:.3f}."
        for b in top["bindings"]
    ]
    return ("I have run the query for you. These are the results: "
            + " ".join(parts)
            + f" The entire rule has a certainty of {top['rule_confidence']:.3f}.")


def render_answer(intent: str, payload: dict) -> str:
    """Fill the reply template for an intent from an engine result payload.

    Confidences always render with three decimals; chart payloads travel as
    attachments, the text only acknowledges them.
    """
    if intent == "load_data":
        return (f"I loaded the {payload['name']} dataset. It has "
                f"{payload['n_rows']} instances and {payload['n_features']} "
                f"features. Ask me about the data, or train the classifier "
                f"when you are ready.")
    if intent == "data_stats":
        return (f"The dataset contains the following variables: "
                f"{_join_names(payload['variables'])}. The dataset has "
                f"{payload['n_rows']} instances in total.")
    if intent == "plot_histogram":
        return "There you go!"
    if intent == "plot_correlation":
        r, p = payload["r"], payload["p"]
        if abs(r) >= 0.7:
            strength = "The correlation seems to be strong"
        elif abs(r) >= 0.4:
            strength = "The correlation seems to be moderate"
        else:
            strength = "The correlation does not seem to be very strong"
        return (f"The correlation value between the submitted variables is "
                f"{r:.2f}. The associated p-value is {p:.3g}. {strength}.")
    if intent == "correlation_matrix":
        return "This is what the correlation matrix looks like."
    if intent == "train_model":
        note = ""
        if payload.get("ignored_params"):
            ignored = _join_names(payload["ignored_params"])
            note = (f" Note: {ignored} are parameters of the tree-ensemble "
                    f"setting; the built-in baseline only uses its neighbor "
                    f"count.")
        return (f"I trained the built-in baseline classifier (k-nearest "
                f"neighbors, k={payload['k']}) on the dataset! The accuracy "
                f"on the test set is {payload['accuracy']:.3f}. I included "
                f"the confusion matrix for the predictions on the test set."
                f"{note} If you are satisfied with the achieved accuracy, "
                f"we can continue!")
    if intent == "train_test_samples":
        pct = round(payload["train_fraction"] * 100)
        return (f"I used {pct}% of the data ({payload['n_train']} instances) "
                f"for training the classification model. For testing, I used "
                f"the remaining {100 - pct}% of the data "
                f"({payload['n_test']} instances).")
    if intent == "train_explanation_module":
        return (f"Done! I calculated the symbolic terms for the values of the "
                f"input variables, created the fuzzy-rough regions, and built "
                f"a knowledge base to run queries. I would appreciate it if "
                f"you used the correct feature and class names. As a "
                f"reminder, the feature names are "
                f"{_join_names(payload['features'])}. The decision classes "
                f"are {_join_names(payload['classes'])}.")
    if intent == "problem_complexity":
        return (f"The complexity of this problem is "
                f"{payload['complexity']:.3f}. This complexity measure "
                f"provides evidence of the extent to which the rules in the "
                f"knowledge base conflict with each other.")
    if intent == "bias":
        return (f"The fuzzy-rough uncertainty (explicit bias) against this "
                f"feature is {payload['bias']:.3f}. This measure quantifies "
                f"the changes in the decision boundaries after removing a "
                f"protected feature as a proxy for bias quantification.")
    if intent == "top_rules_kb":
        lines = [f"These are the top {len(payload['rules'])} rules in the "
                 f"knowledge base:"]
        for i, sentence in enumerate(payload["rules"], start=1):
            lines.append(f"Rule #{i}: {sentence}")
        return "\n".join(lines)
    if intent == "closest_instance":
        return (f"I found that the following rule is the closest: "
                f"{payload['sentence']}")
    if intent == "run_full_query":
        return _render_query_reply(payload, "is")
    if intent == "run_cf_query":
        return _render_query_reply(payload, "should be")
    if intent == "help":
        return (
            "I can load ARFF datasets, describe and chart the data, train a "
            "baseline classifier, build the symbolic explanation module, and "
            "answer what-if and counterfactual questions about it. Try: "
            "'Load the diabetes dataset', 'How is Age distributed?', "
            "'Train the model', 'Construct the symbolic explanation module', "
            "'If Age is low and the outcome is positive, what is Mass?', or "
            "'What are the top rules in the knowledge base?'")
    raise ValueError(f"no reply template for intent {intent!r}")
