import json

import numpy as np
import pytest

from graphwave import load_network
from graphwave.errors import SpecFormatError
from graphwave import presets


class TestLoading:
    def test_loads_from_path(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text(json.dumps(presets.kv_star(cells=8)))
        spec = load_network(path)
        assert len(spec.graph.edges) == 3
        assert spec.cells == {0: 8, 1: 8, 2: 8}

    def test_invalid_json_is_format_error(self, tmp_path):
        path = tmp_path / "net.json"
        path.write_text("{not json")
        with pytest.raises(SpecFormatError):
            load_network(path)

    def test_missing_file_is_format_error(self, tmp_path):
        with pytest.raises(SpecFormatError):
            load_network(tmp_path / "absent.json")

    def test_schema_violation_is_format_error(self):
        doc = presets.kv_star()
        del doc["edges"][0]["length"]
        with pytest.raises(SpecFormatError):
            load_network(doc)

    def test_unknown_damping_kind_is_format_error(self):
        doc = presets.kv_star()
        doc["edges"][0]["damping"] = {"kind": "viscous", "value": 1.0}
        with pytest.raises(SpecFormatError):
            load_network(doc)

    def test_negative_damping_is_format_error(self):
        doc = presets.kv_star()
        doc["edges"][0]["damping"] = {"kind": "constant", "value": -1.0}
        with pytest.raises(SpecFormatError):
            load_network(doc)

    def test_pp_length_mismatch_is_format_error(self):
        doc = presets.kv_star()
        doc["edges"][0]["damping"] = {"kind": "pp", "breaks": [0.0, 0.5],
                                      "coeffs": [[1.0]]}
        with pytest.raises(SpecFormatError):
            load_network(doc)

    def test_default_cells_scale_with_length(self):
        doc = presets.kv_star()
        for e in doc["edges"]:
            del e["cells"]
        doc["edges"][0]["length"] = 2.0
        spec = load_network(doc, default_resolution=16)
        assert spec.cells[0] == 32
        assert spec.cells[1] == 16

    def test_tolerances_passthrough(self):
        doc = presets.kv_star()
        doc["tolerances"] = {"node_tol": 1e-9}
        spec = load_network(doc)
        assert spec.tolerances == {"node_tol": 1e-9}


class TestReorientation:
    def test_flipped_edge_profile_is_mirrored(self):
        # orient the child edge toward the root in the file; tree
        # canonicalization must flip it and mirror its ramp profile
        doc = {
            "mode": "tree",
            "vertices": [{"id": "R", "root": True}, {"id": "O"}, {"id": "L"}],
            "edges": [
                {"id": "par", "from": "R", "to": "O", "length": 1.0,
                 "damping": {"kind": "zero"}},
                {"id": "ch", "from": "L", "to": "O", "length": 1.0,
                 "damping": {"kind": "pp", "breaks": [0.0, 1.0],
                             "coeffs": [[0.0, 1.0]]}},
            ],
        }
        spec = load_network(doc)
        assert spec.graph.reoriented == (1,)
        e = spec.graph.edges[1]
        assert (e.tail, e.head) == (1, 2)  # now runs O -> L
        # file profile a = x grows from L; after the flip the edge runs O -> L
        # and the mirrored profile a(x) = 1 - x still has value 1 at L
        prof = spec.damping[1]
        assert prof.eval(0.0) == pytest.approx(1.0)
        assert prof.eval(1.0) == pytest.approx(0.0)
