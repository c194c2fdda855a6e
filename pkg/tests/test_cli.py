import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ricciflow import euler_characteristic, load_mesh
from ricciflow.cli import ExitCode, main

from helpers import tetra_off_bytes


def run_cli(argv, cwd=None):
    """Run the CLI in a subprocess (isolated cwd, captured output)."""
    proc = subprocess.run(
        [sys.executable, "-m", "ricciflow.cli", *argv],
        capture_output=True, text=True, cwd=cwd,
    )
    return proc


class TestExitCodes:
    def test_partition_distinct(self):
        codes = [int(c) for c in ExitCode]
        assert len(set(codes)) == len(codes)
        assert int(ExitCode.OK) == 0 and 0 not in codes[1:]


class TestGenerate:
    def test_writes_reloadable_mesh(self, tmp_path):
        out = tmp_path / "m.off"
        rc = main(["generate", "--genus2", "--rounds", "3", "--perturb",
                   "0.05", "--seed", "7", "--out", str(out)])
        assert rc == 0
        mesh = load_mesh(out)
        assert euler_characteristic(mesh) == -2

    def test_rounds_zero_usage_error(self, tmp_path):
        rc = main(["generate", "--genus2", "--rounds", "0",
                   "--out", str(tmp_path / "m.off")])
        assert rc == int(ExitCode.USAGE)

    def test_rounds_one_off_not_representable(self, tmp_path):
        rc = main(["generate", "--genus2", "--rounds", "1",
                   "--out", str(tmp_path / "m.off")])
        assert rc == int(ExitCode.IO)
        # the intrinsic JSON format carries quotient combinatorics fine
        rc = main(["generate", "--genus2", "--rounds", "1",
                   "--out", str(tmp_path / "m.json")])
        assert rc == 0

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.off", tmp_path / "b.off"
        for out in (a, b):
            assert main(["generate", "--genus2", "--rounds", "2", "--perturb",
                         "0.05", "--seed", "3", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_flags_usage_exit(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--rounds", "2", "--out", str(tmp_path / "x.off")])
        assert exc.value.code == 2


@pytest.fixture(scope="module")
def gen_mesh(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "g2.off"
    assert main(["generate", "--genus2", "--rounds", "2", "--perturb", "0.05",
                 "--seed", "5", "--out", str(path)]) == 0
    return path


class TestFlow:
    def test_converged_run(self, tmp_path, gen_mesh):
        out = tmp_path / "run"
        rc = main(["flow", "--input", str(gen_mesh), "--out-dir", str(out),
                   "--eigen-count", "2", "--snapshot-stride", "8"])
        assert rc == 0
        for name in ("trace.csv", "trace.json", "final_state.json",
                     "final_mesh.json"):
            assert (out / name).exists()
        rows = [ln.split(",") for ln in
                (out / "trace.csv").read_text().splitlines()
                if ln and not ln.startswith("#")]
        header, final = rows[0], rows[-1]
        r = float(final[header.index("r")])
        tol = 1e-3 * abs(r)
        assert abs(float(final[header.index("R_min")]) - r) <= tol
        assert abs(float(final[header.index("R_max")]) - r) <= tol

    def test_chi_refusal(self, tmp_path):
        tetra = tmp_path / "tetra.off"
        tetra.write_bytes(tetra_off_bytes())
        rc = main(["flow", "--input", str(tetra), "--out-dir",
                   str(tmp_path / "r")])
        assert rc == int(ExitCode.CHI_REFUSAL)

    def test_non_convergence_exit_and_two_rows(self, tmp_path, gen_mesh):
        out = tmp_path / "run"
        rc = main(["flow", "--input", str(gen_mesh), "--out-dir", str(out),
                   "--max-steps", "1", "--eigen-count", "0"])
        assert rc == int(ExitCode.NON_CONVERGENCE)
        rows = [ln for ln in (out / "trace.csv").read_text().splitlines()
                if ln and not ln.startswith("#")]
        assert len(rows) == 1 + 2  # header + initial + final

    def test_dt_underflow_exit(self, tmp_path, gen_mesh):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "dt_init": 10.0, "dt_min": 9.0, "eigen_count": 0,
            "stability_safety": None,
        }))
        rc = main(["flow", "--input", str(gen_mesh), "--config", str(cfg),
                   "--out-dir", str(tmp_path / "r")])
        assert rc == int(ExitCode.DT_UNDERFLOW)

    def test_eigensolver_failure_exit(self, tmp_path):
        mesh = tmp_path / "m.off"
        assert main(["generate", "--genus2", "--rounds", "3", "--perturb",
                     "0.05", "--seed", "1", "--out", str(mesh)]) == 0
        rc = main(["flow", "--input", str(mesh), "--out-dir",
                   str(tmp_path / "r"), "--eigen-maxiter", "1"])
        assert rc == int(ExitCode.EIGEN_FAILURE)

    def test_bad_config_usage(self, tmp_path, gen_mesh):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"no_such_field": 1}')
        rc = main(["flow", "--input", str(gen_mesh), "--config", str(cfg),
                   "--out-dir", str(tmp_path / "r")])
        assert rc == int(ExitCode.USAGE)

    def test_missing_input_io(self, tmp_path):
        rc = main(["flow", "--input", str(tmp_path / "nope.off"),
                   "--out-dir", str(tmp_path / "r")])
        assert rc == int(ExitCode.IO)

    def test_manifest_regeneration_matches_api(self, tmp_path, gen_mesh):
        """Flow on a generated OFF uses the intrinsic metric, not the
        placeholder coordinates."""
        from ricciflow import FlowConfig, generate_genus2, run_flow

        out = tmp_path / "run"
        assert main(["flow", "--input", str(gen_mesh), "--out-dir", str(out),
                     "--eigen-count", "0"]) == 0
        doc = json.loads((out / "trace.json").read_text())
        mesh = generate_genus2(2, 0.05, 5)
        trace = run_flow(mesh, FlowConfig(eigen_count=0))
        assert doc["r"] == trace.r
        assert doc["sigma"] == trace.sigma

    def test_ignore_manifest_uses_coordinates(self, tmp_path, gen_mesh):
        out = tmp_path / "run"
        rc = main(["flow", "--input", str(gen_mesh), "--out-dir", str(out),
                   "--ignore-manifest", "--eigen-count", "0",
                   "--max-steps", "1"])
        assert rc == int(ExitCode.NON_CONVERGENCE)
        doc = json.loads((out / "trace.json").read_text())
        assert doc["chi"] == -2  # combinatorics survive; metric differs

    def test_json_mesh_input(self, tmp_path):
        mesh_path = tmp_path / "m.json"
        assert main(["generate", "--genus2", "--rounds", "2", "--perturb",
                     "0.0", "--seed", "0", "--out", str(mesh_path)]) == 0
        rc = main(["flow", "--input", str(mesh_path), "--out-dir",
                   str(tmp_path / "r"), "--eigen-count", "0"])
        assert rc == 0


@pytest.fixture(scope="module")
def flow_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("verify")
    mesh = base / "m.off"
    assert main(["generate", "--genus2", "--rounds", "3", "--perturb",
                 "0.05", "--seed", "4", "--out", str(mesh)]) == 0
    out = base / "run"
    assert main(["flow", "--input", str(mesh), "--out-dir", str(out)]) == 0
    return out


class TestVerify:
    def test_all_verdicts_true(self, flow_run):
        rc = main(["verify", "--run", str(flow_run)])
        assert rc == 0
        report = json.loads((flow_run / "report.json").read_text())
        assert report["all_ok"] is True
        assert report["indices"] == [1, 2, 3, 4, 5]

    def test_report_schema(self, flow_run):
        import jsonschema

        assert main(["verify", "--run", str(flow_run)]) == 0
        schema = json.loads(open(
            os.path.join(os.path.dirname(__file__), "..", "docs",
                         "theorem_report.schema.json")).read())
        report = json.loads((flow_run / "report.json").read_text())
        jsonschema.validate(report, schema)

    def test_plots_emitted_deterministically(self, flow_run):
        assert main(["verify", "--run", str(flow_run), "--plots"]) == 0
        svg1 = (flow_run / "eigenvalue_bounds.svg").read_bytes()
        svg2 = (flow_run / "curvature_barrier.svg").read_bytes()
        assert svg1.startswith(b"<?xml") and svg2.startswith(b"<?xml")
        assert main(["verify", "--run", str(flow_run), "--plots"]) == 0
        assert (flow_run / "eigenvalue_bounds.svg").read_bytes() == svg1
        assert (flow_run / "curvature_barrier.svg").read_bytes() == svg2

    def test_sigma_override_looser_ok(self, flow_run):
        report_path = flow_run / "report_sigma.json"
        doc = json.loads((flow_run / "trace.json").read_text())
        looser = 10.0 * doc["sigma"]
        rc = main(["verify", "--run", str(flow_run), "--sigma", str(looser),
                   "--out", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert all(report["theorem2a_ok"])
        assert report["sigma_override"] == looser

    def test_sigma_override_invalid(self, flow_run):
        rc = main(["verify", "--run", str(flow_run), "--sigma", "-0.001"])
        assert rc == int(ExitCode.USAGE)

    def test_unconverged_trace_refused(self, tmp_path, flow_run):
        mesh = tmp_path / "m.off"
        assert main(["generate", "--genus2", "--rounds", "2", "--perturb",
                     "0.05", "--seed", "4", "--out", str(mesh)]) == 0
        out = tmp_path / "run"
        assert main(["flow", "--input", str(mesh), "--out-dir", str(out),
                     "--max-steps", "2", "--eigen-count", "2"]
                    ) == int(ExitCode.NON_CONVERGENCE)
        assert main(["verify", "--run", str(out)]) == int(
            ExitCode.NON_CONVERGENCE)

    def test_requires_exactly_one_source(self, flow_run):
        assert main(["verify"]) == int(ExitCode.USAGE)
        assert main(["verify", "--run", str(flow_run), "--trace",
                     str(flow_run / "trace.json")]) == int(ExitCode.USAGE)


class TestEndToEndDeterminism:
    def test_pipeline_byte_identical(self, tmp_path):
        outputs = []
        for attempt in ("one", "two"):
            cwd = tmp_path / attempt
            cwd.mkdir()
            for argv in (
                ["generate", "--genus2", "--rounds", "3", "--perturb", "0.05",
                 "--seed", "11", "--out", "m.off"],
                ["flow", "--input", "m.off", "--out-dir", "run",
                 "--eigen-count", "3", "--snapshot-stride", "8"],
                ["verify", "--run", "run", "--plots"],
            ):
                proc = run_cli(argv, cwd=cwd)
                assert proc.returncode == 0, proc.stderr
            blob = {}
            for name in ("m.off", "run/trace.csv", "run/trace.json",
                         "run/report.json", "run/final_state.json",
                         "run/final_mesh.json", "run/eigenvalue_bounds.svg"):
                blob[name] = (cwd / name).read_bytes()
            outputs.append(blob)
        assert outputs[0] == outputs[1]
