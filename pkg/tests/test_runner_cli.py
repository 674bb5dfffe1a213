"""Runner determinism, config round trips, and CLI surface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from weightlab.cli import main
from weightlab.runner import ExperimentConfig, run


def test_config_round_trip():
    config = ExperimentConfig(
        kind="weights", seed=7, dimension=1, depth=6, lattice="shifted",
        params={"weight": "lognormal(0.5)", "p": "3/2"},
    )
    back = ExperimentConfig.from_json(json.loads(json.dumps(config.to_json())))
    assert back == config
    assert back.hash() == config.hash()


def test_run_is_deterministic():
    config = ExperimentConfig(kind="weights", seed=3, depth=7, params={"p": "2"})
    a, b = run(config), run(config)
    assert a.config_hash == b.config_hash
    assert a.outputs_hash() == b.outputs_hash()
    other = run(ExperimentConfig(kind="weights", seed=4, depth=7, params={"p": "2"}))
    assert other.outputs_hash() != a.outputs_hash()


def test_unknown_kind_is_named():
    with pytest.raises(ValueError, match="mystery"):
        run(ExperimentConfig(kind="mystery"))


def test_unit_weight_experiment_passes():
    record = run(ExperimentConfig(kind="weights", depth=5, params={"weight": "unit", "p": "2"}))
    assert record.passed
    assert record.outputs["ap"] == 1.0


def test_sparse_experiment_checks():
    record = run(ExperimentConfig(kind="sparse", seed=9, depth=8, params={"f": "nonneg"}))
    assert record.checks["sparse_valid"] and record.checks["pointwise_domination"]


def test_norm_experiment_variable_kind(tmp_path):
    record = run(
        ExperimentConfig(
            kind="norm", seed=2, depth=5,
            params={"space": "weighted:p=2,w=unit", "f": "random"},
        )
    )
    assert record.passed and record.outputs["norm"] > 0
    assert record.outputs["trace"][0]["op"] == "parse_space"
    nested = run(
        ExperimentConfig(
            kind="norm", seed=2, depth=5,
            params={"space": "weighted:p=2,w=power(0.5,0)", "f": "constant(1)"},
        )
    )
    assert nested.passed


def test_rdf_and_selfimprove_and_lrplan_kinds():
    rec = run(ExperimentConfig(kind="rdf", seed=5, depth=6, params={"r": 2.0, "iterations": 12}))
    assert rec.checks["dominates_seed"] and rec.checks["pointwise_a1"]
    rec = run(ExperimentConfig(kind="selfimprove", params={"bound": "2", "r_star": "2", "c_d": "4"}))
    assert rec.passed and rec.outputs["r0"] == {"num": 16, "den": 15}
    rec = run(
        ExperimentConfig(
            kind="lrplan",
            params={"r1": "2", "s1": "4", "r2": "2", "s2": "4", "p1": "8/3"},
        )
    )
    assert rec.outputs["legs"][0]["q"] == {"num": 8, "den": 3}


def test_rescale_kind_reports_trace():
    rec = run(
        ExperimentConfig(
            kind="rescale", seed=1, depth=5,
            params={"space": "weighted:p=2,w=lognormal(0.4)", "r": "4/3", "s": "4"},
        )
    )
    assert rec.checks["chain_consistent"]
    assert any(step["op"] == "associate" for step in rec.outputs["trace"])


def test_cli_weights_stdout(capsys):
    code = main(["weights", "--weight", "unit", "--p", "2", "--levels", "4"])
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert code == 0
    assert payload["outputs"]["ap"] == 1.0


def test_cli_probe_writes_csv_and_figure(tmp_path):
    out = tmp_path / "probe.csv"
    code = main(
        [
            "probe-compactness", "--depths", "5..6", "--tails", "2,4",
            "--out", str(out), "--format", "csv",
        ]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "depth,k,sigma_ratio"
    assert len(lines) == 1 + 2 * 2
    assert (tmp_path / "probe.png").exists()


def test_cli_probe_no_figure_flag(tmp_path):
    out = tmp_path / "probe.csv"
    main(
        [
            "probe-compactness", "--depths", "5..5", "--tails", "2",
            "--out", str(out), "--format", "csv", "--no-figure",
        ]
    )
    assert out.exists() and not (tmp_path / "probe.png").exists()


def test_cli_norm_and_maximal(tmp_path):
    out = tmp_path / "norm.json"
    code = main(
        ["norm", "--space", "weighted:p=3/2,w=unit", "--f", "constant(2)",
         "--levels", "4", "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["outputs"]["norm"] == pytest.approx(2.0, rel=1e-12)
    code = main(["maximal", "--f", "indicator(1,0)", "--levels", "3", "--out", str(out)])
    assert code == 0
    values = json.loads(out.read_text())["outputs"]["values"]
    assert values[0] == 1.0 and values[-1] == 0.5


def test_cli_function_file_round_trip(tmp_path):
    from weightlab.grids import Grid, GridFunction

    f = GridFunction.from_flat(Grid(1, 3), np.arange(8, dtype=float))
    path = tmp_path / "f.json"
    path.write_text(f.to_json())
    out = tmp_path / "out.json"
    main(["norm", "--space", "weighted:p=2,w=unit", "--f", f"@{path}",
          "--levels", "3", "--out", str(out)])
    got = json.loads(out.read_text())["outputs"]["norm"]
    expected = float(np.sqrt(np.mean(np.arange(8.0) ** 2)))
    assert got == pytest.approx(expected, rel=1e-12)


def test_cli_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "weightlab.cli", "selfimprove", "--B", "2", "--rstar", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["r0"] == {"num": 16, "den": 15}
