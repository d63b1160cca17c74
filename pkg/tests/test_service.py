import re

import pytest
from fastapi.testclient import TestClient

from fuzzykb import dataset, granulation, prediction, rulebase, scoring
from fuzzykb.queries import Query, resolve
from fuzzykb.service import create_app

from conftest import DATA_DIR


@pytest.fixture(scope="module")
def client():
    app = create_app(datasets_dir=DATA_DIR)
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def session_id(client):
    return client.post("/sessions").json()["session_id"]


def _say(client, session_id, text):
    response = client.post(f"/sessions/{session_id}/message",
                           json={"text": text})
    assert response.status_code == 200
    return response.json()


class TestLifecycle:
    def test_unknown_session_404(self, client):
        assert client.post("/sessions/nope/message",
                           json={"text": "help"}).status_code == 404

    def test_query_before_kb_conflicts(self, client, session_id):
        response = client.post(f"/sessions/{session_id}/query/whatif",
                               json={"desired_class": "x", "unknowns": ["a"]})
        assert response.status_code == 409

    def test_build_before_predictions_conflicts(self, client, session_id):
        client.post(f"/sessions/{session_id}/dataset",
                    json={"name": "diabetes"})
        response = client.post(f"/sessions/{session_id}/kb", json={})
        assert response.status_code == 409

    def test_bad_payload_is_400(self, client, session_id):
        client.post(f"/sessions/{session_id}/dataset", json={"name": "diabetes"})
        client.post(f"/sessions/{session_id}/baseline", json={})
        client.post(f"/sessions/{session_id}/kb", json={})
        response = client.post(f"/sessions/{session_id}/query/whatif",
                               json={"desired_class": "no_such_class",
                                     "unknowns": ["Age"]})
        assert response.status_code == 400

    def test_load_unknown_dataset_is_400(self, client, session_id):
        response = client.post(f"/sessions/{session_id}/dataset",
                               json={"name": "atlantis"})
        assert response.status_code == 400
        assert "available" in response.json()["detail"]


@pytest.fixture(scope="module")
def built(client):
    session_id = client.post("/sessions").json()["session_id"]
    client.post(f"/sessions/{session_id}/dataset", json={"name": "diabetes"})
    client.post(f"/sessions/{session_id}/baseline",
                json={"k": 5, "train_fraction": 0.8, "seed": 0})
    client.post(f"/sessions/{session_id}/kb",
                json={"symbols": 5, "implicator": "lukasiewicz",
                      "distance": "fuzzy", "lambda": 1.0})
    return session_id


@pytest.fixture(scope="module")
def reference_kb():
    ds = dataset.parse_arff((DATA_DIR / "diabetes.arff").read_text())
    ds = dataset.normalize(dataset.impute(ds))
    train, _ = dataset.split(ds, dataset.SplitConfig(0.8, seed=0))
    preds = prediction.baseline_classify(train, ds, k=5)
    grans = granulation.granulate_dataset(
        ds, granulation.FcmConfig(n_clusters=5))
    kb = rulebase.build_rules(ds, grans, preds)
    scoring.score_rules(kb, scoring.ScoringConfig())
    return kb


class TestStructuredEndpoints:
    def test_whatif_equals_direct_library_call(self, client, built, reference_kb):
        body = {"desired_class": "tested_negative", "unknowns": ["Age"],
                "known": {"Plas": "very_low"}, "limit": 3}
        got = client.post(f"/sessions/{built}/query/whatif", json=body).json()
        expected = resolve(reference_kb, Query(
            kind="whatif", desired_class="tested_negative",
            unknowns=("Age",), known={"Plas": "very_low"}), limit=3)
        assert len(got["solutions"]) == len(expected.solutions)
        for g, e in zip(got["solutions"], expected.solutions):
            assert g["rule_id"] == e.rule_id
            assert g["rule_confidence"] == pytest.approx(e.rule_confidence)
            assert g["bindings"]["Age"]["term"] == e.bindings["Age"].term

    def test_complexity_equals_direct_call(self, client, built, reference_kb):
        got = client.get(f"/sessions/{built}/complexity").json()["complexity"]
        assert got == pytest.approx(scoring.complexity(reference_kb))

    def test_top_rules_equal_direct_call(self, client, built, reference_kb):
        got = client.get(f"/sessions/{built}/top-rules", params={"n": 5}).json()
        expected = scoring.top_rules(reference_kb, 5)
        assert [r["id"] for r in got["rules"]] == [r.id for r in expected]

    def test_bias_equals_direct_call(self, client, built, reference_kb):
        got = client.get(f"/sessions/{built}/bias",
                         params={"feature": "Age"}).json()
        expected = scoring.bias_proxy(reference_kb, "Age",
                                      reference_kb.scoring_config)
        assert got["bias"] == pytest.approx(expected)

    def test_export_prolog_round_trips(self, client, built):
        got = client.get(f"/sessions/{built}/kb/export",
                         params={"format": "prolog"}).json()
        back = rulebase.parse_prolog_kb(got["text"])
        assert len(back.rules) == 768

    def test_counterfactual_endpoint(self, client, built):
        body = {"desired_class": "tested_negative",
                "contrast_class": "tested_positive",
                "unknowns": ["Plas"], "known": {"Age": "very_low"}}
        response = client.post(f"/sessions/{built}/query/counterfactual",
                               json=body)
        assert response.status_code == 200
        assert "solutions" in response.json()

    def test_closest_rule_by_id(self, client, built, reference_kb):
        from fuzzykb.queries import closest_rule
        got = client.post(f"/sessions/{built}/closest-rule",
                          json={"rule_id": 0}).json()
        expected = closest_rule(reference_kb, reference_kb.rule_by_id(0))
        assert got["closest"]["id"] == expected.id

    def test_histogram_chart_series(self, client, built):
        got = client.get(f"/sessions/{built}/charts/histogram",
                         params={"feature": "Age", "bins": 8}).json()
        assert sum(got["counts"]) == 768 and len(got["edges"]) == 9

    def test_correlation_chart_series(self, client, built):
        got = client.get(f"/sessions/{built}/charts/correlation",
                         params={"x": "Age", "y": "Mass"}).json()
        assert "r" in got and "p" in got and len(got["x"]) == 768

    def test_matrix_chart_series(self, client, built):
        got = client.get(f"/sessions/{built}/charts/correlation-matrix").json()
        assert len(got["matrix"]) == len(got["features"]) == 8

    def test_schema_endpoint(self, client, built):
        got = client.get(f"/sessions/{built}/schema").json()
        assert got["stage"] == {"loaded": True, "trained": True, "built": True}
        assert len(got["features"]) == 8
        assert all(len(f["terms"]) == 5 for f in got["features"])


@pytest.fixture(scope="module")
def chat(client):
    session_id = client.post("/sessions").json()["session_id"]
    return client, session_id


class TestConversation:
    def test_scripted_conversation(self, chat):
        client, sid = chat
        out = _say(client, sid, "Load the diabetes dataset")
        assert "diabetes" in out["reply_text"]

        out = _say(client, sid, "Tell me more about the data.")
        assert "768 instances in total" in out["reply_text"]
        assert "Plas" in out["reply_text"]

        out = _say(client, sid, "How is Age distributed?")
        assert out["attachments"][0]["chart"] == "histogram"

        out = _say(client, sid, "How are Age and Mass correlated?")
        assert out["attachments"][0]["chart"] == "scatter"
        assert re.search(r"correlation value .* is -?\d\.\d\d\.",
                         out["reply_text"])

        out = _say(client, sid, "Please show me the correlation matrix.")
        assert out["attachments"][0]["chart"] == "heatmap"

        # lifecycle guidance: build before train
        out = _say(client, sid, "Can you construct the symbolic explanation module?")
        assert "Train the classifier first" in out["reply_text"]

        out = _say(client, sid, "Train the model on this data.")
        assert "accuracy on the test set is 0." in out["reply_text"]
        assert out["attachments"][0]["type"] == "table"

        out = _say(client, sid, "How did you split the data?")
        assert "80% of the data (614 instances)" in out["reply_text"]
        assert "(154 instances)" in out["reply_text"]

        out = _say(client, sid, "Can you construct the symbolic explanation module?")
        assert "Done!" in out["reply_text"]
        assert "tested_negative" in out["reply_text"]

        out = _say(client, sid, "What is the complexity of the loaded problem?")
        assert re.search(r"complexity of this problem is 0\.\d{3}\.",
                         out["reply_text"])

        out = _say(client, sid,
                   "If Plas is very low and the outcome is tested_negative, "
                   "what is Age?")
        assert "I have run the query for you" in out["reply_text"]
        assert re.search(r"Age is [a-z_ ]+, with a certainty of \d\.\d{3}\.",
                         out["reply_text"])
        assert re.search(r"entire rule has a certainty of \d\.\d{3}\.",
                         out["reply_text"])

        out = _say(client, sid, "What rule is closest to this one?")
        assert "the following rule is the closest" in out["reply_text"]
        assert "If " in out["reply_text"]

        out = _say(client, sid,
                   "What values should Plas and Mass take while Age is "
                   "very low for the outcome to be tested_negative instead "
                   "of tested_positive?")
        assert ("should be" in out["reply_text"]
                or "could not find any rule" in out["reply_text"])

        out = _say(client, sid, "What are the top rules in the knowledge base?")
        assert "top 3 rules" in out["reply_text"]
        assert out["attachments"][0]["type"] == "kb-excerpt"

        out = _say(client, sid, "What is the explicit bias associated with Age?")
        assert re.search(r"explicit bias\) against this feature is \d\.\d{3}",
                         out["reply_text"])

    def test_unparseable_text_gets_suggestion(self, chat):
        client, sid = chat
        out = _say(client, sid, "fhqwhgads")
        assert "I did not understand" in out["reply_text"]
        assert "Try something like" in out["reply_text"]

    def test_unknown_class_in_query_mentions_valid_ones(self, chat):
        client, sid = chat
        out = _say(client, sid,
                   "If Plas is very low and the outcome is bogus_class, "
                   "what is Age?")
        assert "tested_negative" in out["reply_text"]

    def test_event_log_records_conversation(self, chat):
        client, sid = chat
        events = client.get(f"/sessions/{sid}/log").json()["events"]
        roles = {e["role"] for e in events}
        assert "user" in roles and "bot" in roles


def test_session_persistence(tmp_path):
    app = create_app(datasets_dir=DATA_DIR, persist_dir=tmp_path)
    with TestClient(app) as client:
        sid = client.post("/sessions").json()["session_id"]
        client.post(f"/sessions/{sid}/dataset", json={"name": "wine"})
        snapshot = tmp_path / f"{sid}.json"
        assert snapshot.exists()
        import json
        doc = json.loads(snapshot.read_text())
        assert doc["dataset_name"] == "wine"
