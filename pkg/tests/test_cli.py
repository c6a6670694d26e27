import json
from pathlib import Path

import numpy as np
import pytest

from graphwave.cli import main
from graphwave import presets


def write_spec(tmp_path: Path, doc, name="net.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestValidateCommand:
    def test_kv_star_passes_and_predicts_exponential(self, tmp_path, capsys):
        spec = write_spec(tmp_path, presets.kv_star(cells=8))
        out = tmp_path / "report.json"
        assert main(["validate", spec, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["predicted"] == "exponential"
        assert report["continuity"]["case"] == "I"
        assert (tmp_path / "report.manifest.json").exists()

    def test_chain_predicts_polynomial(self, tmp_path):
        spec = write_spec(tmp_path, presets.elastic_kv_chain(cells=8))
        out = tmp_path / "report.json"
        assert main(["validate", spec, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["predicted"] == "polynomial-t-2"

    def test_elastic_cycle_fails_with_structural_message(self, tmp_path, capsys):
        doc = presets.triangle_pendant(cells=8)
        for e in doc["edges"][:3]:
            e["damping"] = {"kind": "zero"}
        doc["edges"][3]["damping"] = {"kind": "constant", "value": 1.0}
        spec = write_spec(tmp_path, doc)
        assert main(["validate", spec]) == 1
        assert "cycle" in capsys.readouterr().out

    def test_undamped_predicts_not_stable(self, tmp_path):
        spec = write_spec(tmp_path, presets.undamped_string(cells=8))
        out = tmp_path / "report.json"
        assert main(["validate", spec, "--out", str(out)]) == 1
        assert json.loads(out.read_text())["predicted"] == "not-asymptotically-stable"

    def test_parse_error_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        assert main(["validate", str(bad)]) == 2

    def test_schema_error_exits_2(self, tmp_path):
        doc = presets.kv_star(cells=8)
        doc["edges"][0]["damping"] = {"kind": "nope"}
        spec = write_spec(tmp_path, doc)
        assert main(["validate", spec]) == 2

    def test_strict_leaves_flag(self, tmp_path):
        spec = write_spec(tmp_path, presets.elastic_kv_chain(cells=8))
        assert main(["validate", spec]) == 0
        assert main(["validate", spec, "--strict-leaves"]) == 1


class TestSimulateCommand:
    def test_writes_trace_fit_and_manifest(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        out = tmp_path / "out" / "trace.csv"
        rc = main(["simulate", spec, "--T", "10", "--out", str(out),
                   "--sample-every", "4"])
        assert rc == 0
        assert out.exists()
        fits = json.loads((tmp_path / "out" / "trace.fit.json").read_text())
        assert fits["exponential"]["rate"] > 0
        manifest = json.loads((tmp_path / "out" / "trace.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert "trace.csv" in manifest["outputs"]

    def test_zero_state_spec(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        out = tmp_path / "trace.csv"
        rc = main(["simulate", spec, "--T", "1", "--u0", "zero", "--v0", "zero",
                   "--out", str(out)])
        assert rc == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert np.all(data[:, 1] == 0.0)

    def test_bad_state_spec_exits_2(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        assert main(["simulate", spec, "--T", "1", "--u0", "wiggle",
                     "--out", str(tmp_path / "t.csv")]) == 2

    def test_dump_matrices(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        out = tmp_path / "trace.csv"
        rc = main(["simulate", spec, "--T", "1", "--out", str(out),
                   "--dump-matrices"])
        assert rc == 0
        for name in ("M.mtx", "K.mtx", "K_a.mtx"):
            assert (tmp_path / name).exists()


class TestSpectrumCommand:
    def test_writes_csv(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        out = tmp_path / "spectrum.csv"
        assert main(["spectrum", spec, "--out", str(out)]) == 0
        rows = out.read_text().strip().split("\n")
        assert rows[0] == "re,im,residual"
        assert len(rows) == 2 * 7 + 1  # 2n eigenvalues


class TestResolventCommand:
    def test_writes_csv_and_slope(self, tmp_path):
        spec = write_spec(tmp_path, presets.single_kv_string(cells=8))
        out = tmp_path / "resolvent.csv"
        assert main(["resolvent", spec, "--points", "6", "--out", str(out)]) == 0
        rows = out.read_text().strip().split("\n")
        assert rows[0] == "beta,resolvent_norm"
        meta = json.loads((tmp_path / "resolvent.scan.json").read_text())
        assert "slope" in meta


class TestReportCommand:
    def test_case_one_agreement(self, tmp_path):
        spec = write_spec(tmp_path, presets.kv_star(cells=16))
        out_dir = tmp_path / "report"
        rc = main(["report", spec, "--out-dir", str(out_dir), "--points", "12"])
        report = json.loads((out_dir / "report.json").read_text())
        assert report["predicted"] == "exponential"
        assert report["agreement"] is True
        assert rc == 0
        for name in ("validate.json", "spectrum.csv", "resolvent.csv",
                     "resolvent_refined.csv", "trace.csv", "manifest.json"):
            assert (out_dir / name).exists()

    def test_undamped_reports_no_regime(self, tmp_path):
        spec = write_spec(tmp_path, presets.undamped_string(cells=8))
        out_dir = tmp_path / "report"
        rc = main(["report", spec, "--out-dir", str(out_dir)])
        report = json.loads((out_dir / "report.json").read_text())
        assert report["predicted"] == "not-asymptotically-stable"
        assert report["resolvent_slope"] is None
        assert report["agreement"] is True
        assert rc == 0
