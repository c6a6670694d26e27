"""Network spec files: JSON schema, loading, and derived per-edge data."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import jsonschema

from .damping import DampingProfile
from .errors import InvalidDampingProfile, SpecFormatError
from .graph import MetricGraph, build_graph

DEFAULT_RESOLUTION = 64  # cells per unit length when an edge omits "cells"

_ID = {"type": ["integer", "string"]}

PROFILE_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"kind": {"const": "zero"}},
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "constant"},
                "value": {"type": "number", "minimum": 0},
            },
            "required": ["kind", "value"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "pp"},
                "breaks": {"type": "array", "minItems": 2, "items": {"type": "number"}},
                "coeffs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                },
            },
            "required": ["kind", "breaks", "coeffs"],
            "additionalProperties": False,
        },
    ],
}

NETWORK_SCHEMA = {
    "type": "object",
    "required": ["mode", "vertices", "edges"],
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": ["tree", "graph"]},
        "vertices": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": _ID,
                    "dirichlet": {"type": "boolean"},
                    "root": {"type": "boolean"},
                },
                "additionalProperties": False,
            },
        },
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "from", "to", "length", "damping"],
                "properties": {
                    "id": _ID,
                    "from": _ID,
                    "to": _ID,
                    "length": {"type": "number", "exclusiveMinimum": 0},
                    "cells": {"type": "integer", "minimum": 2},
                    "damping": PROFILE_SCHEMA,
                },
                "additionalProperties": False,
            },
        },
        "tolerances": {"type": "object"},
    },
}


@dataclass(frozen=True)
class NetworkSpec:
    """A loaded network description: validated graph plus per-edge data."""

    graph: MetricGraph
    damping: Mapping[int, DampingProfile]
    cells: Mapping[int, int]
    tolerances: Mapping[str, float] = field(default_factory=dict)
    document: Mapping = field(default_factory=dict)


def load_network(source, default_resolution: int = DEFAULT_RESOLUTION) -> NetworkSpec:
    """Load a network spec from a path or an already-parsed dict.

    Schema violations, malformed JSON, and inadmissible damping profiles raise
    SpecFormatError; structural graph errors propagate from build_graph.
    Damping profiles of edges that tree-mode canonicalization reoriented are
    mirrored so they describe the same physical coefficient.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise SpecFormatError(f"cannot read {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"{source}: invalid JSON: {exc}") from exc
    else:
        doc = source

    try:
        jsonschema.validate(doc, NETWORK_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecFormatError(f"schema violation at {where}: {exc.message}") from exc

    graph = build_graph(doc)
    flipped = set(graph.reoriented)
    damping: dict[int, DampingProfile] = {}
    cells: dict[int, int] = {}
    for eid, entry in enumerate(doc["edges"]):
        try:
            prof = DampingProfile.from_config(entry["damping"], float(entry["length"]))
        except InvalidDampingProfile as exc:
            raise SpecFormatError(f"edge {entry['id']!r}: {exc}") from exc
        if eid in flipped:
            prof = prof.mirrored()
        damping[eid] = prof
        cells[eid] = int(
            entry.get("cells", max(2, round(default_resolution * float(entry["length"]))))
        )
    tolerances = dict(doc.get("tolerances", {}))
    return NetworkSpec(graph=graph, damping=damping, cells=cells,
                       tolerances=tolerances, document=doc)
