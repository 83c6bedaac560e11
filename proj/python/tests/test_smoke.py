# Copyright 2026 The Modelgate Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import pathlib
import random

import pytest

import modelgate

SCENARIOS = pathlib.Path(
    os.environ.get(
        "MODELGATE_SCENARIO_DIR",
        pathlib.Path(__file__).resolve().parents[2] / "scenarios",
    )
)


def test_model_ids():
    assert modelgate.parse_model_id("model-id:fraud-check.v12") == ("fraud-check", 12)
    assert modelgate.format_model_id("svc", 3) == "model-id:svc.v3"
    with pytest.raises(modelgate.Error) as err:
        modelgate.parse_model_id("model-id:svc")
    assert err.value.code == "MalformedId"
    assert isinstance(err.value, ValueError)


def test_canonical_encoding_orders_keys():
    text = json.dumps(
        {
            "features": [{"value": 1, "name": "x"}],
            "timestamp": "2018-06-16T00:00:00.000Z",
            "request_id": "req-1",
            "debug": True,
        }
    )
    assert modelgate.canonicalize("score_request", text) == (
        '{"request_id":"req-1","timestamp":"2018-06-16T00:00:00Z",'
        '"features":[{"name":"x","value":1.0}]}'
    )
    bad = json.dumps(
        {
            "request_id": "r",
            "served_by": "model-id:s.v1",
            "predictions": [{"result": "a", "uncertainty": 1.5}],
            "status": "ok",
            "latency_ms": 1,
        }
    )
    with pytest.raises(modelgate.Error) as err:
        modelgate.canonicalize("score_response", bad)
    assert err.value.code == "SchemaError"


def test_canary_matches_reference_hash():
    def fnv(text):
        h = 0xCBF29CE484222325
        for b in text.encode():
            h = ((h ^ b) * 0x100000001B3) % 2**64
        return h

    assert modelgate.fnv1a64("", "a") == fnv("a")
    ids = [f"req-{i:06d}" for i in range(1, 10001)]
    got = sum(modelgate.canary_assign(i, 0.1, "s1") for i in ids)
    want = sum((fnv("s1" + i) % 1_000_000) < 100_000 for i in ids)
    assert got == want
    assert 910 <= got <= 1090


def test_threshold():
    response = json.dumps(
        {
            "request_id": "r",
            "served_by": "model-id:s.v2",
            "predictions": [{"result": "a", "uncertainty": 0.15}],
            "status": "ok",
            "latency_ms": 1,
        }
    )
    assert modelgate.apply_threshold(response, 0.85)
    assert not modelgate.apply_threshold(response, 0.9)


def test_psi_and_drift():
    expected = 0.4 * math.log(0.9 / 0.5) - 0.4 * math.log(0.1 / 0.5)
    assert abs(modelgate.psi([0.5, 0.5], [0.9, 0.1]) - expected) < 1e-12
    rng = random.Random(1)
    ref = [{"a": rng.gauss(0, 1), "b": rng.gauss(0, 1)} for _ in range(1000)]
    same = modelgate.drift(ref, ref)
    assert same["aggregate"] == 0.0 and not same["alarm"]
    shifted = [{"a": r["a"] + 5, "b": r["b"] + 5} for r in ref]
    report = modelgate.drift(ref, shifted)
    assert report["alarm"]
    assert set(report["per_feature"]) == {"a", "b"}


def test_clusters_recover_planted_means():
    rng = random.Random(7)
    points = [[rng.gauss(c, 0.5), rng.gauss(c, 0.5)] for c in (0, 10) for _ in range(100)]
    model = modelgate.fit_clusters(points, 2, seed=42)
    centroids = sorted(model.centroids)
    assert math.dist(centroids[0], [0, 0]) < 0.3
    assert math.dist(centroids[1], [10, 10]) < 0.3
    trace = model.objective_trace
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    index, distance, anomalous = model.assign([50.0, 50.0])
    assert anomalous and distance > 40
    one = modelgate.fit_clusters(points, 1)
    mean = [sum(p[i] for p in points) / len(points) for i in range(2)]
    assert max(abs(a - b) for a, b in zip(one.centroids[0], mean)) < 1e-9


def test_synth_score_is_seeded():
    a = modelgate.synth_score({"x": 1.0}, [1.0], 0.8, seed=3)
    b = modelgate.synth_score({"x": 1.0}, [1.0], 0.8, seed=3)
    assert a == b
    predictions, correct = a
    assert len(predictions) == 2
    assert predictions[0][1] <= predictions[1][1]
    assert (predictions[0][0] == "pos") == correct


def test_gateway_staged_rollout():
    policy = json.loads(modelgate.default_policy())
    policy["promotion"]["automatic"] = False
    gate = modelgate.Gateway("svc", policy, admin_token="secret")

    def model(label, confidence, version):
        def score(request):
            return {
                "request_id": request["request_id"],
                "served_by": f"model-id:svc.v{version}",
                "predictions": [{"result": label, "uncertainty": 1 - confidence}],
                "status": "ok",
                "latency_ms": 1.0,
            }

        return score

    gate.add_backend("inproc://v1", model("old", 0.9, 1))
    gate.add_backend("inproc://v2", model("new", 0.9, 2))
    gate.deploy(
        {"model_id": "model-id:svc.v1", "related_to": "service-id:svc", "endpoint": "inproc://v1"}
    )
    assert (
        gate.notify(
            {
                "model_id": "model-id:svc.v2",
                "based_on": "model-id:svc.v1",
                "related_to": "service-id:svc",
                "endpoint": "inproc://v2",
            }
        )
        == "shadow"
    )
    request = {
        "request_id": "r1",
        "timestamp": "2018-06-16T00:00:00Z",
        "features": [{"name": "x", "value": 1.0}],
    }
    assert gate.score(request)["predictions"][0]["result"] == "old"
    assert gate.feedback(
        {"request_id": "r1", "verdict": "good", "timestamp": "2018-06-16T00:00:01Z"}
    )
    for _ in range(3):
        gate.promote("looks fine")
    assert gate.stage("model-id:svc.v2") == "full"
    request["request_id"] = "r2"
    assert gate.score(request)["served_by"] == "model-id:svc.v2"
    assert gate.log_size == 2
    box = gate.fact_box("model-id:svc.v2")
    assert box["provenance"]["based_on"] == "model-id:svc.v1"
    assert "Provenance:" in gate.fact_box_text("model-id:svc.v2")

    status, body = gate.admin("GET", "/admin/models")
    assert status == 200 and len(body["models"]) == 2
    status, _ = gate.admin("POST", "/admin/rollouts/svc/rollback", {})
    assert status == 401


def test_run_scenario_is_deterministic():
    doc = json.loads((SCENARIOS / "bad_challenger.json").read_text())
    doc["traffic"]["total"] = 2000
    a = modelgate.run_scenario(doc)
    b = modelgate.run_scenario(json.dumps(doc))
    assert a == b
    assert a["total"] == 2000
    assert modelgate.run_scenario(doc, seed=8) != a
    with pytest.raises(modelgate.Error) as err:
        modelgate.run_scenario("{}")
    assert err.value.code == "ConfigError"
