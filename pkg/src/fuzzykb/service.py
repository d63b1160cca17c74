"""HTTP service hosting explanation sessions for the chat client.

A session walks the lifecycle load -> explore -> train -> build -> query; the
structured endpoints enforce it with 409 responses, while the free-text
``message`` endpoint answers out-of-order requests with conversational
guidance instead. Structured endpoints are thin wrappers: every result equals
the corresponding direct library call.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import eda, nlq
from .dataset import Dataset, SplitConfig, impute, normalize, parse_arff, split
from .errors import EngineError, ValidationError
from .granulation import FcmConfig, granulate_dataset
from .prediction import Prediction, accuracy, baseline_classify, ingest_predictions
from .queries import Query, QueryConstraints, QuerySession, closest_rule, resolve
from .rulebase import (
    KnowledgeBase,
    build_rules,
    export_prolog_str,
    kb_to_json,
)
from .scoring import ScoringConfig, bias_proxy, complexity, score_rules, top_rules


class Session:
    def __init__(self, session_id: str):
        self.id = session_id
        self.lock = threading.Lock()
        self.dataset_name: str | None = None
        self.ds_raw: Dataset | None = None
        self.ds_imputed: Dataset | None = None
        self.ds_norm: Dataset | None = None
        self.train_ds: Dataset | None = None
        self.test_ds: Dataset | None = None
        self.train_fraction: float | None = None
        self.baseline_k: int | None = None
        self.test_accuracy: float | None = None
        self.predictions: list[Prediction] | None = None
        self.kb: KnowledgeBase | None = None
        self.qsession = QuerySession()
        self.event_log: list[dict] = []

    def log(self, role: str, text: str) -> None:
        self.event_log.append({"role": role, "text": text, "ts": time.time()})

    def schema_view(self) -> nlq.SchemaView:
        if self.kb is not None:
            return nlq.SchemaView.from_kb(self.kb)
        if self.ds_raw is not None:
            return nlq.SchemaView.from_dataset(self.ds_raw)
        return nlq.SchemaView.empty()

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "dataset_name": self.dataset_name,
            "train_fraction": self.train_fraction,
            "baseline_k": self.baseline_k,
            "test_accuracy": self.test_accuracy,
            "kb": None if self.kb is None else json.loads(kb_to_json(self.kb)),
            "event_log": self.event_log,
        }


class MessageIn(BaseModel):
    text: str


class LoadIn(BaseModel):
    name: str | None = None
    arff_text: str | None = None


class PredictionsIn(BaseModel):
    csv_text: str


class BaselineIn(BaseModel):
    k: int = 5
    train_fraction: float = 0.8
    seed: int = 0


class BuildIn(BaseModel):
    symbols: int = 5
    implicator: str = "lukasiewicz"
    distance: str = "fuzzy"
    smoothing: float = Field(default=1.0, alias="lambda")
    model_config = {"populate_by_name": True}


class QueryIn(BaseModel):
    desired_class: str
    unknowns: list[str]
    known: dict[str, str] = {}
    min_term_confidence: float = 0.0
    min_rule_confidence: float = 0.0
    excluded_terms: dict[str, list[str]] = {}
    limit: int | None = 3


class CounterfactualIn(QueryIn):
    contrast_class: str | None = None


class ClosestIn(BaseModel):
    rule_id: int | None = None


def _query_result_json(result) -> dict:
    return {
        "solutions": [
            {
                "rule_id": s.rule_id,
                "bindings": {
                    f: {"term": a.term, "confidence": a.confidence}
                    for f, a in s.bindings.items()
                },
                "rule_confidence": s.rule_confidence,
            }
            for s in result.solutions
        ],
        "relaxed_known": result.relaxed_known,
        "nearest_candidate": result.nearest_candidate,
    }


def _rule_json(kb: KnowledgeBase, rule) -> dict:
    return {
        "id": rule.id,
        "sentence": nlq.rule_sentence(kb, rule),
        "antecedent": [{"term": a.term, "confidence": a.confidence}
                       for a in rule.antecedent],
        "class": rule.class_label,
        "class_confidence": rule.class_confidence,
        "rule_confidence": rule.rule_confidence,
    }


def create_app(datasets_dir: str | Path = "data",
               persist_dir: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    datasets_dir = Path(datasets_dir)
    persist_path = Path(persist_dir) if persist_dir else None
    app = FastAPI(title="fuzzykb explanation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    sessions: dict[str, Session] = {}

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return session

    def persist(session: Session) -> None:
        if persist_path is None:
            return
        persist_path.mkdir(parents=True, exist_ok=True)
        out = persist_path / f"{session.id}.json"
        out.write_text(json.dumps(session.snapshot()), encoding="utf-8")

    def require(condition: bool, message: str) -> None:
        if not condition:
            raise HTTPException(409, message)

    def guard(fn, *args, **kwargs):
        """Translate engine errors into 400 responses for structured routes."""
        try:
            return fn(*args, **kwargs)
        except EngineError as exc:
            raise HTTPException(400, str(exc)) from exc

    # -- session lifecycle -------------------------------------------------

    @app.post("/sessions")
    def create_session():
        session = Session(uuid.uuid4().hex[:12])
        sessions[session.id] = session
        return {"session_id": session.id}

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        return {"events": get_session(session_id).event_log}

    @app.get("/sessions/{session_id}/schema")
    def get_schema(session_id: str):
        session = get_session(session_id)
        view = session.schema_view()
        features = []
        for name in view.features:
            features.append({
                "name": name,
                "terms": list(view.terms.get(name.lower(), ())),
            })
        return {
            "dataset": session.dataset_name,
            "features": features,
            "classes": list(view.classes),
            "class_feature": (session.kb.class_feature_name
                              if session.kb else
                              session.ds_raw.class_feature.name
                              if session.ds_raw else None),
            "stage": {
                "loaded": session.ds_raw is not None,
                "trained": session.predictions is not None,
                "built": session.kb is not None,
            },
        }

    # -- structured pipeline endpoints --------------------------------------

    def do_load(session: Session, name: str | None, arff_text: str | None) -> dict:
        if arff_text is not None:
            ds = parse_arff(arff_text)
            session.dataset_name = name or ds.relation_name
        else:
            if not name:
                raise ValidationError("dataset name required")
            path = None
            for candidate in sorted(datasets_dir.glob("*.arff")):
                if candidate.stem.lower() == name.lower():
                    path = candidate
            if path is None:
                available = sorted(p.stem for p in datasets_dir.glob("*.arff"))
                raise ValidationError(
                    f"no dataset named {name!r}; available: {available}")
            ds = parse_arff(path.read_text(encoding="utf-8"))
            session.dataset_name = name
        session.ds_raw = ds
        session.ds_imputed = impute(ds)
        session.ds_norm = normalize(session.ds_imputed)
        session.train_ds = session.test_ds = None
        session.predictions = None
        session.kb = None
        session.qsession = QuerySession()
        return {
            "name": session.dataset_name,
            "relation": ds.relation_name,
            "n_rows": ds.n_rows,
            "n_features": len(ds.non_class_features()),
            "classes": list(ds.class_labels),
        }

    @app.post("/sessions/{session_id}/dataset")
    def load_dataset(session_id: str, body: LoadIn):
        session = get_session(session_id)
        with session.lock:
            info = guard(do_load, session, body.name, body.arff_text)
            session.log("system", f"loaded dataset {info['name']}")
            persist(session)
            return info

    def do_train(session: Session, k: int, train_fraction: float, seed: int) -> dict:
        train, test = split(session.ds_norm, SplitConfig(train_fraction, seed))
        session.train_ds, session.test_ds = train, test
        session.train_fraction = train_fraction
        session.baseline_k = k
        session.predictions = baseline_classify(train, session.ds_norm, k=k)
        test_preds = baseline_classify(train, test, k=k)
        session.test_accuracy = accuracy(test_preds, test)
        confusion = _confusion(test_preds, test)
        return {
            "k": k,
            "train_fraction": train_fraction,
            "n_train": train.n_rows,
            "n_test": test.n_rows,
            "accuracy": session.test_accuracy,
            "confusion": confusion,
        }

    @app.post("/sessions/{session_id}/baseline")
    def train_baseline(session_id: str, body: BaselineIn):
        session = get_session(session_id)
        with session.lock:
            require(session.ds_norm is not None, "load a dataset first")
            info = guard(do_train, session, body.k, body.train_fraction, body.seed)
            session.log("system", f"trained baseline k={body.k}")
            persist(session)
            return info

    @app.post("/sessions/{session_id}/predictions")
    def ingest(session_id: str, body: PredictionsIn):
        session = get_session(session_id)
        with session.lock:
            require(session.ds_norm is not None, "load a dataset first")
            session.predictions = guard(
                ingest_predictions, session.ds_norm, body.csv_text)
            session.log("system", "ingested external predictions")
            persist(session)
            return {"count": len(session.predictions)}

    def do_build(session: Session, body: BuildIn) -> dict:
        grans = granulate_dataset(session.ds_norm,
                                  FcmConfig(n_clusters=body.symbols))
        kb = build_rules(session.ds_norm, grans, session.predictions)
        cfg = ScoringConfig(implicator=body.implicator, distance=body.distance,
                            smoothing=body.smoothing)
        score_rules(kb, cfg)
        session.kb = kb
        session.qsession = QuerySession()
        return {
            "n_rules": len(kb.rules),
            "features": kb.feature_names(),
            "classes": list(kb.class_domain),
            "scoring": {"implicator": cfg.implicator, "distance": cfg.distance,
                        "lambda": cfg.smoothing},
        }

    @app.post("/sessions/{session_id}/kb")
    def build_kb(session_id: str, body: BuildIn):
        session = get_session(session_id)
        with session.lock:
            require(session.ds_norm is not None, "load a dataset first")
            require(session.predictions is not None,
                    "train the baseline or ingest predictions first")
            info = guard(do_build, session, body)
            session.log("system", f"built knowledge base ({info['n_rules']} rules)")
            persist(session)
            return info

    # -- query endpoints -----------------------------------------------------

    def _to_query(body: QueryIn, kind: str) -> Query:
        constraints = QueryConstraints(
            min_term_confidence=body.min_term_confidence,
            min_rule_confidence=body.min_rule_confidence,
            excluded_terms={f: frozenset(ts)
                            for f, ts in body.excluded_terms.items()},
        )
        contrast = getattr(body, "contrast_class", None)
        return Query(kind=kind, desired_class=body.desired_class,
                     unknowns=tuple(body.unknowns), known=dict(body.known),
                     contrast_class=contrast, constraints=constraints)

    def run_query(session: Session, body: QueryIn, kind: str) -> dict:
        require(session.kb is not None, "build the knowledge base first")
        q = guard(_to_query, body, kind)
        result = guard(resolve, session.kb, q, body.limit)
        session.qsession.record(session.kb, q, result)
        return _query_result_json(result)

    @app.post("/sessions/{session_id}/query/whatif")
    def whatif(session_id: str, body: QueryIn):
        session = get_session(session_id)
        with session.lock:
            out = run_query(session, body, "whatif")
            session.log("system", "resolved what-if query")
            return out

    @app.post("/sessions/{session_id}/query/counterfactual")
    def counterfactual(session_id: str, body: CounterfactualIn):
        session = get_session(session_id)
        with session.lock:
            out = run_query(session, body, "counterfactual")
            session.log("system", "resolved counterfactual query")
            return out

    @app.post("/sessions/{session_id}/closest-rule")
    def closest(session_id: str, body: ClosestIn):
        session = get_session(session_id)
        with session.lock:
            require(session.kb is not None, "build the knowledge base first")
            if body.rule_id is not None:
                reference = guard(session.kb.rule_by_id, body.rule_id)
            else:
                context = session.qsession.last_query_context()
                require(context is not None and context[2] is not None,
                        "no previous query to take a reference rule from")
                reference = context[2]
            rule = guard(closest_rule, session.kb, reference)
            return {"reference_id": reference.id,
                    "closest": _rule_json(session.kb, rule)}

    @app.get("/sessions/{session_id}/complexity")
    def get_complexity(session_id: str):
        session = get_session(session_id)
        require(session.kb is not None, "build the knowledge base first")
        return {"complexity": guard(complexity, session.kb)}

    @app.get("/sessions/{session_id}/bias")
    def get_bias(session_id: str, feature: str):
        session = get_session(session_id)
        require(session.kb is not None, "build the knowledge base first")
        value = guard(bias_proxy, session.kb, feature,
                      session.kb.scoring_config)
        return {"feature": feature, "bias": value}

    @app.get("/sessions/{session_id}/top-rules")
    def get_top_rules(session_id: str, n: int = 3):
        session = get_session(session_id)
        require(session.kb is not None, "build the knowledge base first")
        rules = guard(top_rules, session.kb, n)
        return {"rules": [_rule_json(session.kb, r) for r in rules]}

    @app.get("/sessions/{session_id}/kb/export")
    def export_kb(session_id: str, format: str = "prolog"):
        session = get_session(session_id)
        require(session.kb is not None, "build the knowledge base first")
        if format == "prolog":
            return {"format": "prolog", "text": export_prolog_str(session.kb)}
        if format == "json":
            return {"format": "json", "text": kb_to_json(session.kb)}
        raise HTTPException(400, f"unknown export format {format!r}")

    # -- chart data ----------------------------------------------------------

    @app.get("/sessions/{session_id}/charts/histogram")
    def chart_histogram(session_id: str, feature: str, bins: int = 10):
        session = get_session(session_id)
        require(session.ds_imputed is not None, "load a dataset first")
        return guard(eda.histogram_series, session.ds_imputed, feature, bins)

    @app.get("/sessions/{session_id}/charts/correlation")
    def chart_correlation(session_id: str, x: str, y: str):
        session = get_session(session_id)
        require(session.ds_imputed is not None, "load a dataset first")
        return guard(eda.correlation_series, session.ds_imputed, x, y)

    @app.get("/sessions/{session_id}/charts/correlation-matrix")
    def chart_matrix(session_id: str):
        session = get_session(session_id)
        require(session.ds_imputed is not None, "load a dataset first")
        return guard(eda.correlation_matrix, session.ds_imputed)

    # -- conversational endpoint ----------------------------------------------

    @app.post("/sessions/{session_id}/message")
    def message(session_id: str, body: MessageIn):
        session = get_session(session_id)
        with session.lock:
            session.log("user", body.text)
            reply, attachments, intent_name, entities = _dispatch(session, body.text)
            session.log("bot", reply)
            persist(session)
            return {"reply_text": reply, "attachments": attachments,
                    "intent": intent_name, "entities": entities}

    def _dispatch(session: Session, text: str):
        outcome = nlq.parse(text, session.schema_view())
        if outcome.rejected or outcome.intent is None:
            reply = "I did not understand that."
            if outcome.suggestion:
                reply += f" Try something like: \"{outcome.suggestion}\"."
            return reply, [], None, {}
        intent = outcome.intent
        handler = _HANDLERS.get(intent.name)
        reply, attachments = handler(session, intent)
        return reply, attachments, intent.name, intent.entities

    # Conversational handlers return (reply, attachments); lifecycle gaps
    # answer with guidance rather than HTTP errors.

    def h_help(session, intent):
        return nlq.render_answer("help", {}), []

    def h_load(session, intent):
        name = intent.first("dataset")
        if not name:
            return "Which dataset should I load?", []
        try:
            info = do_load(session, name, None)
        except EngineError as exc:
            return f"I could not load that dataset: {exc}", []
        return nlq.render_answer("load_data", info), []

    def h_stats(session, intent):
        if session.ds_raw is None:
            return "Load a dataset first (for example: \"Load the diabetes dataset\").", []
        payload = {
            "variables": [f.name for f in session.ds_raw.non_class_features()],
            "n_rows": session.ds_raw.n_rows,
        }
        return nlq.render_answer("data_stats", payload), []

    def h_histogram(session, intent):
        if session.ds_imputed is None:
            return "Load a dataset first.", []
        variable = intent.first("variable")
        if not variable:
            return "Which variable should I plot?", []
        try:
            series = eda.histogram_series(session.ds_imputed, variable)
        except EngineError as exc:
            return f"I cannot plot that: {exc}", []
        attachment = {"type": "chart-series", "chart": "histogram",
                      "title": f"Distribution of {series['feature']}",
                      "data": series}
        return nlq.render_answer("plot_histogram", {}), [attachment]

    def h_correlation(session, intent):
        if session.ds_imputed is None:
            return "Load a dataset first.", []
        variables = intent.entities.get("variable", [])
        if len(variables) < 2:
            return "Name two variables to correlate, for example: " \
                   "\"How are Age and Mass correlated?\"", []
        try:
            series = eda.correlation_series(session.ds_imputed,
                                            variables[0], variables[1])
        except EngineError as exc:
            return f"I cannot correlate those: {exc}", []
        attachment = {"type": "chart-series", "chart": "scatter",
                      "title": f"{series['feature_x']} vs {series['feature_y']}",
                      "data": series}
        payload = {"r": series["r"], "p": series["p"]}
        return nlq.render_answer("plot_correlation", payload), [attachment]

    def h_matrix(session, intent):
        if session.ds_imputed is None:
            return "Load a dataset first.", []
        try:
            series = eda.correlation_matrix(session.ds_imputed)
        except EngineError as exc:
            return f"I cannot build the matrix: {exc}", []
        attachment = {"type": "chart-series", "chart": "heatmap",
                      "title": "Correlation matrix", "data": series}
        return nlq.render_answer("correlation_matrix", {}), [attachment]

    def h_train(session, intent):
        if session.ds_norm is None:
            return "Load a dataset first.", []
        ignored = [label for label, entity in
                   (("number of estimators", "n_estimators"),
                    ("maximum depth", "max_depth"))
                   if intent.first(entity)]
        info = do_train(session, k=5, train_fraction=0.8, seed=0)
        info["ignored_params"] = ignored
        attachment = {"type": "table", "title": "Confusion matrix (test set)",
                      "columns": info["confusion"]["labels"],
                      "rows": info["confusion"]["matrix"]}
        return nlq.render_answer("train_model", info), [attachment]

    def h_split_info(session, intent):
        if session.train_ds is None:
            return "Train the classifier first.", []
        payload = {"train_fraction": session.train_fraction,
                   "n_train": session.train_ds.n_rows,
                   "n_test": session.test_ds.n_rows}
        return nlq.render_answer("train_test_samples", payload), []

    def h_build(session, intent):
        if session.ds_norm is None:
            return "Load a dataset first.", []
        if session.predictions is None:
            return "Train the classifier first (\"Train the model\"), or " \
                   "ingest predictions through the API.", []
        info = do_build(session, BuildIn())
        return nlq.render_answer("train_explanation_module", info), []

    def h_complexity(session, intent):
        if session.kb is None:
            return "Build the explanation module first.", []
        return nlq.render_answer(
            "problem_complexity", {"complexity": complexity(session.kb)}), []

    def h_bias(session, intent):
        if session.kb is None:
            return "Build the explanation module first.", []
        variable = intent.first("variable")
        if not variable:
            return "Which feature should I check for bias?", []
        try:
            value = bias_proxy(session.kb, variable, session.kb.scoring_config)
        except EngineError as exc:
            return f"I cannot compute that: {exc}", []
        return nlq.render_answer("bias", {"feature": variable, "bias": value}), []

    def h_top_rules(session, intent):
        if session.kb is None:
            return "Build the explanation module first.", []
        n = int(intent.first("top_n") or 3)
        try:
            rules = top_rules(session.kb, n)
        except EngineError as exc:
            return f"I cannot list those: {exc}", []
        sentences = [nlq.rule_sentence(session.kb, r) for r in rules]
        attachment = {"type": "kb-excerpt",
                      "rules": [_rule_json(session.kb, r) for r in rules]}
        return nlq.render_answer("top_rules_kb", {"rules": sentences}), [attachment]

    def h_closest(session, intent):
        if session.kb is None:
            return "Build the explanation module first.", []
        context = session.qsession.last_query_context()
        if context is None or context[2] is None:
            return "Run a what-if or counterfactual query first, then I can " \
                   "look for the closest rule.", []
        try:
            rule = closest_rule(session.kb, context[2])
        except EngineError as exc:
            return f"I cannot find a closest rule: {exc}", []
        payload = {"sentence": nlq.rule_sentence(session.kb, rule)}
        attachment = {"type": "kb-excerpt",
                      "rules": [_rule_json(session.kb, rule)]}
        return nlq.render_answer("closest_instance", payload), [attachment]

    def _nl_query(session, intent, kind):
        if session.kb is None:
            return "Build the explanation module first.", []
        entities = intent.entities
        outcomes = entities.get("outcome", [])
        if not outcomes:
            return "Please state the desired outcome, for example " \
                   "\"... and the outcome is tested_negative\".", []
        unknowns = entities.get("unknown_concept", [])
        if not unknowns:
            return "Which features should I solve for?", []
        known = dict(zip(entities.get("known_concept", []),
                         entities.get("value", [])))
        contrast = outcomes[1] if kind == "counterfactual" and len(outcomes) > 1 \
            else None
        try:
            q = Query(kind=kind, desired_class=outcomes[0],
                      unknowns=tuple(unknowns), known=known,
                      contrast_class=contrast)
            result = resolve(session.kb, q)
        except EngineError as exc:
            classes = ", ".join(session.kb.class_domain)
            return (f"I could not run that query: {exc}. "
                    f"The decision classes are {classes}."), []
        session.qsession.record(session.kb, q, result)
        payload = {
            "solutions": [
                {"bindings": [
                    {"feature": session.kb.canonical_feature(f),
                     "term": a.term, "confidence": a.confidence}
                    for f, a in s.bindings.items()],
                 "rule_confidence": s.rule_confidence}
                for s in result.solutions
            ],
            "nearest_candidate": result.nearest_candidate,
        }
        intent_name = "run_cf_query" if kind == "counterfactual" else "run_full_query"
        attachments = []
        if result.solutions:
            top = session.kb.rule_by_id(result.solutions[0].rule_id)
            attachments.append({"type": "kb-excerpt",
                                "rules": [_rule_json(session.kb, top)]})
        return nlq.render_answer(intent_name, payload), attachments

    def h_whatif(session, intent):
        return _nl_query(session, intent, "whatif")

    def h_counterfactual(session, intent):
        return _nl_query(session, intent, "counterfactual")

    _HANDLERS = {
        "help": h_help,
        "load_data": h_load,
        "data_stats": h_stats,
        "plot_histogram": h_histogram,
        "plot_correlation": h_correlation,
        "correlation_matrix": h_matrix,
        "train_model": h_train,
        "train_test_samples": h_split_info,
        "train_explanation_module": h_build,
        "problem_complexity": h_complexity,
        "bias": h_bias,
        "top_rules_kb": h_top_rules,
        "closest_instance": h_closest,
        "run_full_query": h_whatif,
        "run_cf_query": h_counterfactual,
    }

    # static chat client, mounted last so API routes keep precedence
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True),
                  name="ui")

    return app


def _confusion(preds, truth) -> dict:
    labels = list(truth.class_labels)
    index = {c.lower(): i for i, c in enumerate(labels)}
    matrix = [[0] * len(labels) for _ in labels]
    for p in preds:
        actual = index[truth.class_label_of_row(p.instance_id).lower()]
        predicted = index[p.class_label.lower()]
        matrix[actual][predicted] += 1
    return {"labels": labels, "matrix": matrix}
