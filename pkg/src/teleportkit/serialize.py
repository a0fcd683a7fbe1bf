"""JSON and CSV encodings of transcripts and reports.

Complex numbers are ``[re, im]`` pairs, matrices are row-major nested lists,
and basis indices put the first label in the most significant bit.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from teleportkit.core import DensityMatrix, State, StateVector
from teleportkit.protocols import Transcript

SCHEMA_VERSION = "teleportkit.transcript/1"
VERIFY_SCHEMA_VERSION = "teleportkit.verify/1"
BASIS_ORDER = "first label is the most significant bit of the basis index"

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

_STATE = {
    "type": "object",
    "required": ["labels", "representation", "data"],
    "properties": {
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "representation": {"enum": ["vector", "matrix"]},
        "data": {
            "type": "array",
            "items": {"anyOf": [_COMPLEX, {"type": "array", "items": _COMPLEX}]},
        },
    },
}

_EVENT = {
    "type": "object",
    "required": ["kind", "party", "detail"],
    "properties": {
        "kind": {"enum": ["prepare", "gate", "measure", "message", "correction"]},
        "party": {"type": "string"},
        "detail": {"type": "object"},
    },
}

TRANSCRIPT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "basis_order", "config", "branches"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "basis_order": {"const": BASIS_ORDER},
        "config": {"type": "object"},
        "branches": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["probability", "events"],
                "properties": {
                    "probability": {"type": "number", "minimum": 0, "maximum": 1},
                    "exact_probability": {"type": "string"},
                    "outcome": {"type": "array", "items": {"type": "string"}},
                    "bits": {"type": "array", "items": {"enum": [0, 1]}},
                    "values": {"type": "object", "additionalProperties": {"enum": [0, 1]}},
                    "fidelity": {"type": "number"},
                    "events": {"type": "array", "items": _EVENT},
                    "final_state": _STATE,
                    "uncorrected_state": _STATE,
                },
            },
        },
        "summary": {"type": "object"},
    },
}

VERIFY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "suite", "seed", "results", "passed"],
    "properties": {
        "schema_version": {"const": VERIFY_SCHEMA_VERSION},
        "suite": {"enum": ["all", "quantum", "classical"]},
        "seed": {"type": "integer"},
        "passed": {"type": "boolean"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "suite", "value", "bound", "passed"],
                "properties": {
                    "name": {"type": "string"},
                    "suite": {"enum": ["quantum", "classical"]},
                    "value": {"type": "number"},
                    "bound": {"type": "number"},
                    "passed": {"type": "boolean"},
                    "detail": {"type": "string"},
                },
            },
        },
    },
}


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def state_to_json(state: State) -> dict:
    if isinstance(state, StateVector):
        return {"labels": list(state.labels), "representation": "vector", "data": [_c(z) for z in state.amplitudes]}
    return {
        "labels": list(state.labels),
        "representation": "matrix",
        "data": [[_c(z) for z in row] for row in state.matrix],
    }


def state_from_json(obj: dict) -> State:
    if obj["representation"] == "vector":
        return StateVector(tuple(obj["labels"]), [complex(re, im) for re, im in obj["data"]])
    mat = np.array([[complex(re, im) for re, im in row] for row in obj["data"]])
    return DensityMatrix(tuple(obj["labels"]), mat)


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def transcript_to_json(t: Transcript) -> dict:
    return {
        "probability": min(1.0, max(0.0, t.probability)),
        "outcome": list(t.outcome),
        "bits": list(t.bits),
        "fidelity": t.fidelity,
        "events": [{"kind": e.kind, "party": e.party, "detail": _plain(dict(e.detail))} for e in t.events],
        "final_state": state_to_json(t.final_state),
        "uncorrected_state": state_to_json(t.uncorrected_state),
    }


def document(config: dict, branches: list[dict], summary: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "basis_order": BASIS_ORDER,
        "config": _plain(config),
        "branches": branches,
    }
    if summary is not None:
        doc["summary"] = _plain(summary)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
