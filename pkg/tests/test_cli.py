import csv
import json
import logging

import numpy as np
import pytest

from cmsdisc import cms_envelope
from cmsdisc import wigner as wigner_module
from cmsdisc.chebyshev_core import ChebKind
from cmsdisc.cli import main
from cmsdisc.config import load_defaults
from cmsdisc.measures import gauss_measure, load_measure, moments, roots_of_unity, save_measure
from cmsdisc.measures import sharpness_witness


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for h in root.handlers:
        if h not in handlers:
            h.close()
    root.handlers[:] = handlers
    root.setLevel(level)


def read_rows(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def test_envelope_two_nodes(runner, tmp_path):
    out = tmp_path / "env.json"
    result = runner.invoke(main, ["envelope", "--kind", "t", "--n0", "2", "--k0", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["p0_minus_q0"] == pytest.approx(0.5)
    assert data["lambda_k0"] == pytest.approx(0.5)
    assert data["check"]["ok"] is True
    assert len(data["samples"]) == 101
    assert data["config"]["command"] == "envelope"


def test_envelope_single_node_is_trivial(runner, tmp_path):
    out = tmp_path / "env.json"
    result = runner.invoke(main, ["envelope", "--kind", "T", "--n0", "1", "--k0", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["p"] == pytest.approx([1.0])
    assert data["q"] == pytest.approx([0.0])
    assert all(s["p"] == pytest.approx(1.0) and s["q"] == pytest.approx(0.0) for s in data["samples"])


@pytest.mark.parametrize(
    "args",
    [
        ["--kind", "t", "--n0", "0", "--k0", "1"],
        ["--kind", "t", "--n0", "4", "--k0", "5"],
        ["--kind", "v", "--n0", "4", "--k0", "1"],
        ["--kind", "t", "--n0", "4", "--k0", "1", "--bogus"],
    ],
)
def test_envelope_usage_errors(runner, args):
    assert runner.invoke(main, ["envelope", *args]).exit_code == 2


def test_ill_conditioned_build_exits_with_3(runner, monkeypatch):
    monkeypatch.setitem(load_defaults()["envelope"], "residual_tol", -1.0)
    cms_envelope._build_envelope.cache_clear()
    try:
        result = runner.invoke(main, ["envelope", "--kind", "u", "--n0", "4", "--k0", "2"])
    finally:
        cms_envelope._build_envelope.cache_clear()
    assert result.exit_code == 3


def test_bound_for_point_mass(runner, tmp_path, delta_file):
    out = tmp_path / "bound.csv"
    args = ["bound", "--measure", str(delta_file), "--kind", "t", "--n0", "2", "--x0", "0", "--out", str(out)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    (row,) = read_rows(out)
    assert float(row["true_discrepancy"]) == pytest.approx(0.5)
    assert float(row["et_bound"]) == pytest.approx(1.0)
    assert float(row["cms_exact_bound"]) >= 0.5
    sidecar = json.loads((tmp_path / "bound.config.json").read_text(encoding="utf-8"))
    assert sidecar["k_used"] == 1.0
    assert sidecar["atoms"] == 1


def test_bound_grid_for_zero_moment_measure(runner, tmp_path):
    measure = save_measure(gauss_measure(ChebKind.FIRST, 8), tmp_path / "gauss.csv")
    out = tmp_path / "bound.csv"
    args = ["bound", "--measure", str(measure), "--kind", "t", "--n0", "4", "--K", "2", "--out", str(out)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    rows = read_rows(out)
    assert len(rows) == 201
    assert [float(r["et_bound"]) for r in rows] == pytest.approx([0.5] * 201)
    for r in rows:
        assert float(r["true_discrepancy"]) <= float(r["cms_exact_bound"]) + 1e-12


def test_bound_reduces_circle_measures(runner, tmp_path):
    measure = save_measure(roots_of_unity(6), tmp_path / "roots.csv")
    out = tmp_path / "bound.csv"
    args = ["bound", "--measure", str(measure), "--kind", "t", "--n0", "3", "--out", str(out)]
    assert runner.invoke(main, args).exit_code == 0
    assert len(read_rows(out)) == 201


def test_bound_missing_file(runner, tmp_path):
    missing = tmp_path / "missing.csv"
    args = ["bound", "--measure", str(missing), "--kind", "t", "--n0", "2", "--out", str(tmp_path / "o.csv")]
    result = runner.invoke(main, args)
    assert result.exit_code == 2
    assert "missing.csv" in result.output


def test_bound_rejects_n0_beyond_the_exact_limit(runner, tmp_path, delta_file):
    args = ["bound", "--measure", str(delta_file), "--kind", "t", "--n0", "127", "--out", str(tmp_path / "o.csv")]
    result = runner.invoke(main, args)
    assert result.exit_code == 2
    assert "--n0" in result.output and "127" in result.output
    assert "65" not in result.output


def test_bound_malformed_file(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("position,weight\n0.1,oops\n", encoding="utf-8")
    args = ["bound", "--measure", str(bad), "--kind", "u", "--n0", "2", "--out", str(tmp_path / "o.csv")]
    result = runner.invoke(main, args)
    assert result.exit_code == 2
    assert "bad.csv" in result.output


def test_wigner_small_run_is_deterministic(runner, tmp_path):
    args = ["wigner", "--N", "2", "--trials", "1", "--ensemble", "real_rademacher", "--seed", "7"]
    first, second = tmp_path / "a", tmp_path / "b"
    assert runner.invoke(main, [*args, "--out", str(first)]).exit_code == 0
    result = runner.invoke(main, [*args, "--out", str(second)])
    assert result.exit_code == 0, result.output
    assert "max error / bound ratio" in result.output
    for name in ("counts.csv", "u_moments.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    counts = read_rows(first / "counts.csv")
    assert len(counts) == 201
    assert {float(r["mean_count"]) for r in counts} <= {0.0, 1.0, 2.0}
    config = json.loads((first / "config.json").read_text(encoding="utf-8"))
    assert config["n"] == 2 and config["seed"] == 7
    assert config["max_ratio"] == max(float(r["ratio"]) for r in counts)


def test_wigner_variance_output(runner, tmp_path, monkeypatch):
    args = ["wigner", "--N", "4", "--trials", "30", "--variance", "--n-max", "3", "--out", str(tmp_path)]
    seen = []
    original = wigner_module.sample_spectrum
    monkeypatch.setattr(
        wigner_module, "sample_spectrum", lambda config, trial=0: seen.append(trial) or original(config, trial)
    )
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert sorted(seen) == list(range(30))
    spread, counts = read_rows(tmp_path / "variance.csv"), read_rows(tmp_path / "counts.csv")
    assert len(spread) == 201
    assert [r["variance"] for r in spread] == [r["variance"] for r in counts]
    assert [int(r["n"]) for r in read_rows(tmp_path / "u_moments.csv")] == [1, 2, 3]


@pytest.mark.parametrize(
    "extra",
    [
        ["--N", "4", "--ensemble", "cauchy"],
        ["--N", "1001"],
        ["--N", "4", "--trials", "5", "--variance"],
        ["--N", "4", "--n-max", "9"],
    ],
)
def test_wigner_usage_errors(runner, tmp_path, extra):
    result = runner.invoke(main, ["wigner", *extra, "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_witness_single_node(runner, tmp_path):
    out = tmp_path / "witness.csv"
    result = runner.invoke(main, ["witness", "--n0", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    mu = load_measure(out)
    assert mu.positions == pytest.approx([-0.5, 0.5])
    assert mu.weights == pytest.approx([0.5, 0.5])
    report = json.loads((tmp_path / "witness.report.json").read_text(encoding="utf-8"))
    assert report["max_abs_u_moment"] < 1e-12
    assert report["sharpness_ratio"] >= 1.0 / load_defaults()["thresholds"]["sharpness_factor"]


def test_witness_file_round_trips_moments(runner, tmp_path):
    out = tmp_path / "w.csv"
    assert runner.invoke(main, ["witness", "--n0", "6", "--out", str(out)]).exit_code == 0
    loaded = moments(load_measure(out), ChebKind.SECOND, 13).values
    direct = moments(sharpness_witness(6), ChebKind.SECOND, 13).values
    assert np.max(np.abs(loaded - direct)) <= 1e-14


def test_calibrate_is_repeatable(runner, tmp_path):
    runs = []
    for name in ("one.json", "two.json"):
        out = tmp_path / name
        args = ["calibrate", "--corpus-seed", "3", "--n0", "2", "--n0", "4", "--out", str(out)]
        assert runner.invoke(main, args).exit_code == 0
        runs.append(json.loads(out.read_text(encoding="utf-8")))
    first, second = runs
    assert [first[k] for k in ("k1", "k2", "k3")] == [second[k] for k in ("k1", "k2", "k3")]
    assert runs[0]["k1"] > 0 and runs[0]["k2"] > 0 and runs[0]["k3"] > 0
    assert runs[0]["config"]["n0"] == [2, 4]


def test_log_file_receives_resolved_config(runner, tmp_path):
    log_file = tmp_path / "run.log"
    args = ["--log-file", str(log_file), "witness", "--n0", "2", "--out", str(tmp_path / "w.csv")]
    assert runner.invoke(main, args).exit_code == 0
    text = log_file.read_text(encoding="utf-8")
    assert "config {" in text
    assert '"command": "witness"' in text
