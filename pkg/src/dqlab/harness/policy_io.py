"""Policy serialization: per-stage Q-function payloads plus stage metadata.

Net stages embed the exact net document; tabular stages store their tables;
linear stages store weights plus the name of a built-in feature map (opaque
callables do not serialize).
"""

from __future__ import annotations

import json

import numpy as np

from ..nets import net_from_json, net_to_json
from ..qlearn import LinearQ, NetQ, Policy, TabularQ

__all__ = ["FEATURE_MAPS", "policy_to_json", "policy_from_json"]


def _affine(X):
    X = np.atleast_2d(X)
    return np.column_stack([np.ones(len(X)), X])


FEATURE_MAPS = {"affine": _affine}


def policy_to_json(policy: Policy, feature_names: dict[int, str] | None = None) -> str:
    stages = []
    for t, q in enumerate(policy.stage_qs, start=1):
        if isinstance(q, TabularQ):
            stages.append({"kind": "tabular", "table": q.table.tolist(), "clamp": q.clamp})
        elif isinstance(q, NetQ):
            stages.append({"kind": "net", "net": json.loads(net_to_json(q.net))})
        elif isinstance(q, LinearQ):
            name = (feature_names or {}).get(t)
            if name not in FEATURE_MAPS:
                raise ValueError(
                    f"stage {t}: linear Q-functions serialize only with a named feature map"
                )
            stages.append({
                "kind": "linear", "weights": q.weights.tolist(),
                "clamp": q.clamp, "features": name,
            })
        else:
            raise ValueError(f"stage {t}: unserializable Q-function {type(q).__name__}")
    doc = {
        "kind": "dqlab-policy",
        "version": 1,
        "stages": stages,
        "action_sets": [a.tolist() for a in policy.action_sets],
    }
    return json.dumps(doc)


def policy_from_json(text: str) -> Policy:
    doc = json.loads(text)
    if doc.get("kind") != "dqlab-policy":
        raise ValueError("not a serialized policy")
    qs = []
    for st in doc["stages"]:
        if st["kind"] == "tabular":
            qs.append(TabularQ(np.array(st["table"], dtype=float), st["clamp"]))
        elif st["kind"] == "net":
            qs.append(NetQ(net_from_json(json.dumps(st["net"]))))
        elif st["kind"] == "linear":
            qs.append(LinearQ(np.array(st["weights"], dtype=float),
                              FEATURE_MAPS[st["features"]], st["clamp"]))
        else:
            raise ValueError(f"unknown stage kind {st['kind']!r}")
    action_sets = [np.array(a, dtype=float) for a in doc["action_sets"]]
    return Policy(qs, action_sets)
