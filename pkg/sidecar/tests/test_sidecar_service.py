"""Wire-contract conformance for the model sidecar.

These tests run fully in-process (plus one real-socket server for the
client round-trip) and never need network access or model weights.
"""

import json
import threading
import time
from pathlib import Path

import pytest

model_sidecar = pytest.importorskip("model_sidecar")

import jsonschema
from fastapi.testclient import TestClient

from model_sidecar import LABEL_SETS, SidecarConfig, create_app

REPO_ROOT = Path(__file__).resolve().parents[2]
SCHEMA = json.loads((REPO_ROOT / "classify_response.schema.json").read_text())

ALL_TASKS = sorted(LABEL_SETS)


@pytest.fixture(scope="module")
def client():
    config = SidecarConfig(models={task: "builtin" for task in ALL_TASKS})
    return TestClient(create_app(config))


def classify(client, text, tasks):
    return client.post("/classify", json={"text": text, "tasks": tasks})


class TestContract:
    def test_response_schema_valid_for_every_task(self, client):
        resp = classify(client, "flood warning issued", ALL_TASKS)
        assert resp.status_code == 200
        body = resp.json()
        jsonschema.validate(body, SCHEMA)
        assert set(body["results"]) == set(ALL_TASKS)

    def test_label_sets_and_score_sums(self, client):
        body = classify(client, "flood warning issued", ALL_TASKS).json()
        for task, entry in body["results"].items():
            assert set(entry["scores"]) == set(LABEL_SETS[task])
            assert sum(entry["scores"].values()) == pytest.approx(1.0, abs=1e-6)
            assert entry["dominant"] in LABEL_SETS[task]
            assert entry["scores"][entry["dominant"]] == max(entry["scores"].values())

    def test_sentiment_example(self, client):
        body = classify(client, "flood warning issued", ["sentiment"]).json()
        jsonschema.validate(body, SCHEMA)
        assert set(body["results"]["sentiment"]["scores"]) == {
            "negative", "neutral", "positive",
        }

    def test_primary_parser_accepts_response(self, client):
        crisis = pytest.importorskip("crisis_pulse.classify")
        tasks = ["sentiment", "binary:disaster", "binary:medical"]
        body = classify(client, "storm surge", tasks).json()
        parsed = crisis.parse_classify_response(body, tasks)
        assert set(parsed) == set(tasks)
        for task in tasks:
            assert parsed[task].dominant in LABEL_SETS[task]

    def test_deterministic_per_input(self, client):
        first = classify(client, "same text", ALL_TASKS).json()
        second = classify(client, "same text", ALL_TASKS).json()
        for task in ALL_TASKS:
            for label in LABEL_SETS[task]:
                a = first["results"][task]["scores"][label]
                b = second["results"][task]["scores"][label]
                assert abs(a - b) <= 1e-6

    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["tasks"] == ALL_TASKS


class TestErrors:
    def test_missing_text_is_400(self, client):
        resp = client.post("/classify", json={"tasks": ["sentiment"]})
        assert resp.status_code == 400

    def test_non_json_body_is_400(self, client):
        resp = client.post("/classify", content=b"not json {")
        assert resp.status_code == 400

    def test_non_string_text_is_400(self, client):
        resp = client.post("/classify", json={"text": 7, "tasks": ["sentiment"]})
        assert resp.status_code == 400

    def test_empty_or_bad_tasks_is_400(self, client):
        assert classify(client, "x", []).status_code == 400
        assert classify(client, "x", ["nonsense_task"]).status_code == 400
        assert client.post("/classify", json={"text": "x"}).status_code == 400

    def test_over_length_text_is_413(self):
        config = SidecarConfig(max_request_chars=10)
        local = TestClient(create_app(config))
        assert classify(local, "x" * 11, ["sentiment"]).status_code == 413
        assert classify(local, "x" * 10, ["sentiment"]).status_code == 200

    def test_503_while_loading(self):
        app = create_app(defer_load=True)
        local = TestClient(app)
        assert classify(local, "x", ["sentiment"]).status_code == 503
        assert local.get("/health").status_code == 503
        app.state.load_models()
        assert classify(local, "x", ["sentiment"]).status_code == 200


@pytest.fixture(scope="module")
def endpoint():
    uvicorn = pytest.importorskip("uvicorn")
    app = create_app(SidecarConfig(models={task: "builtin" for task in ALL_TASKS}))
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            pytest.fail("sidecar server did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestLiveRoundTrip:
    """remote_classify (real HTTP client) against a real-socket server."""

    def test_remote_classify_round_trip(self, endpoint):
        crisis = pytest.importorskip("crisis_pulse.classify")
        tasks = ["sentiment", "binary:disaster", "binary:humanitarian", "binary:medical"]
        results = crisis.remote_classify("flood warning issued", tasks, endpoint)
        for task in tasks:
            assert sum(results[task].scores.values()) == pytest.approx(1.0, abs=1e-6)
            assert results[task].dominant in LABEL_SETS[task]

    def test_remote_classify_rejection_maps_to_protocol_error(self, endpoint):
        crisis = pytest.importorskip("crisis_pulse.classify")
        errors = pytest.importorskip("crisis_pulse.errors")
        with pytest.raises(errors.ProtocolError):
            crisis.remote_classify("x", ["nonsense_task"], endpoint)
