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

"""Python access to the modelgate gateway core.

Protocol messages cross the boundary as JSON text; the helpers here accept
and return plain dicts where that is more convenient.
"""

import json

from modelgate._core import (
    Clusters,
    Error,
    apply_threshold,
    canary_assign,
    canonicalize,
    default_policy,
    drift,
    fit_clusters,
    fnv1a64,
    format_model_id,
    parse_model_id,
    psi,
    synth_score,
    validate_policy,
)
from modelgate._core import Gateway as _Gateway
from modelgate._core import run_scenario as _run_scenario

__all__ = [
    "Clusters",
    "Error",
    "Gateway",
    "apply_threshold",
    "canary_assign",
    "canonicalize",
    "default_policy",
    "drift",
    "fit_clusters",
    "fnv1a64",
    "format_model_id",
    "parse_model_id",
    "psi",
    "run_scenario",
    "synth_score",
    "validate_policy",
]


def run_scenario(scenario, seed=None):
    """Runs a scenario (dict or JSON text) and returns the report as a dict."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    return json.loads(_run_scenario(text, seed))


class Gateway:
    """In-process gateway for one service with Python callables as backends."""

    def __init__(self, service, policy=None, admin_token=""):
        if isinstance(policy, dict):
            policy = json.dumps(policy)
        self._gate = _Gateway(service, policy, admin_token)

    def add_backend(self, endpoint, score):
        """`score` maps a request dict to a response dict."""
        self._gate.add_backend(endpoint, lambda text: json.dumps(score(json.loads(text))))

    def deploy(self, notification):
        return self._gate.deploy(json.dumps(notification))

    def notify(self, notification):
        return self._gate.notify(json.dumps(notification))

    def score(self, request):
        return json.loads(self._gate.score(json.dumps(request)))

    def feedback(self, record):
        return self._gate.feedback(json.dumps(record))

    def promote(self, cause="python"):
        return self._gate.promote(cause)

    def rollback(self, cause="python"):
        self._gate.rollback(cause)

    def stage(self, model_id):
        return self._gate.stage(model_id)

    def fact_box(self, model_id):
        return json.loads(self._gate.fact_box(model_id))

    def fact_box_text(self, model_id):
        return self._gate.fact_box_text(model_id)

    def admin(self, method, path, body=None, token=""):
        text = "" if body is None else json.dumps(body)
        status, reply = self._gate.admin(method, path, text, token)
        return status, json.loads(reply) if reply else None

    @property
    def log_size(self):
        return self._gate.log_size
