"""Experiment driver: data loading, exit codes, manifests, determinism."""

import json
import math

import numpy as np
import pytest

from mkdv_series import NormIndex, weighted_norm
from mkdv_series.experiments import (
    EXIT_ASSERTION,
    EXIT_BAD_SPEC,
    EXIT_IO,
    EXIT_OK,
    ExperimentError,
    ExperimentSpec,
    load_initial_data,
    main,
    run_experiment,
)


# -- initial data -----------------------------------------------------------


def test_builtin_cosine():
    a = load_initial_data("cosine(0.1)", 6)
    assert a[1] == pytest.approx(0.05) and a[-1] == pytest.approx(0.05)
    assert a[0] == 0.0 and a.cutoff == 6


def test_builtin_delta():
    a = load_initial_data("delta(3, 1)", 6)
    assert a[3] == 1.0 and np.sum(np.abs(a.values)) == 1.0


def test_builtin_random_fl_norm():
    a = load_initial_data("random_fl(0.5, 2, 1.0, seed=1)", 8)
    assert weighted_norm(a, NormIndex(0.5, 2.0)) == pytest.approx(1.0, abs=1e-12)
    b = load_initial_data("random_fl(0.5, 2, 1.0, seed=1)", 8)
    assert np.array_equal(a.values, b.values)


def test_file_round_trip(tmp_path):
    a = load_initial_data("cosine(0.2)", 5)
    path = tmp_path / "data.json"
    path.write_text(a.to_json())
    b = load_initial_data(str(path), 5)
    assert np.array_equal(a.values, b.values)
    c = load_initial_data(str(path), 3)
    assert c.cutoff == 3


def test_file_parse_error_has_line_info(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"cutoff": 2,\n "re": [oops]}')
    with pytest.raises(ExperimentError) as err:
        load_initial_data(str(path), 2)
    assert "broken.json:2" in str(err.value)


def test_bad_builtin_rejected():
    with pytest.raises(ExperimentError):
        load_initial_data("random_fl(0.5)", 4)


# -- experiment runs --------------------------------------------------------


def test_unknown_kind_is_bad_spec(tmp_path):
    rc = run_experiment(ExperimentSpec("nonsense", {}), str(tmp_path))
    assert rc == EXIT_BAD_SPEC


def test_unknown_param_is_bad_spec(tmp_path):
    spec = ExperimentSpec("lemma-bound", {"K": 1, "samples": 5, "bogus_key": 1})
    rc = run_experiment(spec, str(tmp_path))
    assert rc == EXIT_BAD_SPEC


def test_lemma_bound_passes_and_writes_outputs(tmp_path):
    spec = ExperimentSpec("lemma-bound", {"K": 2, "samples": 50})
    rc = run_experiment(spec, str(tmp_path), seed=7)
    assert rc == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["pass"] is True
    assert all(a["passed"] for a in manifest["assertions"])
    assert "wall_time_s" in manifest and "version" in manifest
    rows = (tmp_path / "lemma_bound.csv").read_text().strip().split("\n")
    assert rows[0].startswith("tree,")
    # 1 + 3 trees, 50 samples, 3 times each
    assert len(rows) == 1 + 4 * 50 * 3


def test_broken_tolerance_fails_with_exit_3(tmp_path):
    # deliberately impossible bound constant: ratios must exceed 1
    spec = ExperimentSpec("lemma-bound", {"K": 1, "samples": 20, "C": 1e-9})
    rc = run_experiment(spec, str(tmp_path), seed=1)
    assert rc == EXIT_ASSERTION
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["pass"] is False
    assert any(not a["passed"] for a in manifest["assertions"])


def test_io_failure_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = run_experiment(ExperimentSpec("lemma-bound", {"K": 1, "samples": 2}), str(blocker / "sub"))
    assert rc == EXIT_IO


def test_oracle_compare_zero_data(tmp_path):
    spec = ExperimentSpec(
        "oracle-compare",
        {"data": "delta(0, 0)", "N": 4, "K": 2, "t": 0.01, "dt": 1e-4, "halving": False},
    )
    rc = run_experiment(spec, str(tmp_path))
    assert rc == EXIT_OK
    rows = (tmp_path / "oracle_compare.csv").read_text().strip().split("\n")
    assert float(rows[1].split(",")[1]) == 0.0


def test_oracle_compare_picard_mode(tmp_path):
    spec = ExperimentSpec(
        "oracle-compare",
        {"oracle": "picard", "N": 4, "K": 2, "t": 0.02, "halving": False, "tol": 1e-8},
    )
    rc = run_experiment(spec, str(tmp_path))
    assert rc == EXIT_OK


def test_kernel_norm_csv_schema(tmp_path):
    spec = ExperimentSpec("kernel-norms", {"n": [4, 8], "M_factor": 5})
    rc = run_experiment(spec, str(tmp_path))
    assert rc == EXIT_OK
    rows = (tmp_path / "kernel_norms.csv").read_text().strip().split("\n")
    assert rows[0] == "n,s,p,pair,M,norm"
    assert len(rows) == 1 + 2 * 3


def test_jobs_do_not_change_results(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    spec = ExperimentSpec("lemma-bound", {"K": 2, "samples": 25})
    assert run_experiment(spec, str(a_dir), jobs=1, seed=3) == EXIT_OK
    assert run_experiment(spec, str(b_dir), jobs=3, seed=3) == EXIT_OK
    assert (a_dir / "lemma_bound.csv").read_bytes() == (b_dir / "lemma_bound.csv").read_bytes()


def test_rerun_byte_identical(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    spec = ExperimentSpec("convergence", {"N": 3, "K": 2, "R": [0.5]})
    assert run_experiment(spec, str(a_dir), seed=5) == EXIT_OK
    assert run_experiment(spec, str(b_dir), seed=5) == EXIT_OK
    assert (a_dir / "convergence.csv").read_bytes() == (b_dir / "convergence.csv").read_bytes()
    ma = json.loads((a_dir / "manifest.json").read_text())
    mb = json.loads((b_dir / "manifest.json").read_text())
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    assert ma == mb


def test_cli_main_exit_codes(tmp_path):
    out = str(tmp_path / "run")
    rc = main(
        [
            "--experiment",
            "residual",
            "--param",
            "N=4",
            "--param",
            "K=1",
            "--param",
            "t=0.02",
            "--param",
            "grid_points=17",
            "--param",
            "tol=1e-3",
            "--out",
            out,
            "--seed",
            "1",
        ]
    )
    assert rc == EXIT_OK
    assert main(["--experiment", "residual", "--param", "badkey=1", "--out", out]) == EXIT_BAD_SPEC
    assert main(["--experiment", "residual", "--param", "notkeyvalue", "--out", out]) == EXIT_BAD_SPEC


def test_gauge_check_small(tmp_path):
    spec = ExperimentSpec("gauge-check", {"N": 6, "eps": 0.2, "t": 0.05, "dt": 1e-3, "tol": 1e-8})
    rc = run_experiment(spec, str(tmp_path))
    assert rc == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    value = [a for a in manifest["assertions"] if "gauge" in a["name"]][0]["value"]
    assert value < 1e-10  # recorded measured value, far below tolerance
