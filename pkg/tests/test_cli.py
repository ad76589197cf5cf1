import json
import math
import subprocess
import sys

import numpy as np
import pytest

from magmoments import PointCloud, weights_at_scale
from magmoments.cli import main


def run_cli(*args):
    return main(list(args))


@pytest.fixture()
def blob_csv(tmp_path):
    path = tmp_path / "pts.csv"
    assert run_cli(
        "datagen", "--kind", "blobs", "--n", "40", "--dim", "2",
        "--seed", "7", "--out", str(path),
    ) == 0
    return path


def test_datagen_deterministic(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for out in (a, b):
        run_cli("datagen", "--kind", "annulus", "--n", "25", "--dim", "2",
                "--seed", "3", "--out", str(out))
    assert a.read_bytes() == b.read_bytes()


def test_weights_column_sums_to_magnitude(blob_csv, tmp_path):
    out = tmp_path / "w.csv"
    assert run_cli("weights", "--input", str(blob_csv), "--t", "1",
                   "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    data = [line.split(",") for line in lines[1:] if not line.startswith("#")]
    w = np.array([float(r[-1]) for r in data])
    reported = float(lines[-1].split(",")[1])
    assert abs(w.sum() - reported) < 1e-10
    # CLI output equals the direct library call, full precision.
    cloud = PointCloud.from_csv(blob_csv)
    wv = weights_at_scale(cloud, 1.0)
    assert np.array_equal(w, np.array([float("%.17g" % v) for v in wv.weights]))


def test_moments_columns(blob_csv, tmp_path):
    out = tmp_path / "m.csv"
    assert run_cli("moments", "--input", str(blob_csv), "--order", "32",
                   "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0].endswith("w,mu0,log1p_mu0")
    row = [float(v) for v in lines[1].split(",")]
    mu0, log_mu0 = row[-2], row[-1]
    assert log_mu0 == pytest.approx(math.log1p(mu0), rel=1e-12)


def test_magfn_matches_library(blob_csv, tmp_path, capsys):
    assert run_cli("magfn", "--input", str(blob_csv), "--scales", "0.5,1,2") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,magnitude"
    cloud = PointCloud.from_csv(blob_csv)
    mags = [float(line.split(",")[1]) for line in lines[1:]]
    for t, got in zip((0.5, 1.0, 2.0), mags):
        assert got == pytest.approx(weights_at_scale(cloud, t).magnitude, abs=1e-15)


def test_hull_approx_epsilon_zero_equals_hull(blob_csv, tmp_path):
    hull_out = tmp_path / "hull.json"
    approx_out = tmp_path / "approx.json"
    assert run_cli("hull", "--input", str(blob_csv), "--out", str(hull_out)) == 0
    assert run_cli("hull-approx", "--input", str(blob_csv), "--epsilon", "0",
                   "--out", str(approx_out)) == 0
    full = json.loads(hull_out.read_text())
    approx = json.loads(approx_out.read_text())
    assert approx["approxHull"]["volume"] == full["volume"]
    assert approx["removedIndices"] == []


def test_hull_off_export(blob_csv, tmp_path):
    off = tmp_path / "hull.off"
    assert run_cli("hull", "--input", str(blob_csv), "--off", str(off)) == 0
    assert off.read_text().startswith("OFF\n")


def test_threshold_convention_flag(blob_csv, tmp_path):
    out = tmp_path / "p.json"
    assert run_cli("hull-approx", "--input", str(blob_csv), "--epsilon", "2",
                   "--threshold-convention", "paper", "--out", str(out)) == 0
    assert json.loads(out.read_text())["thresholdConvention"] == "paper"


def test_experiments_subcommand(tmp_path):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({
        "dims": [2], "trialsPerDim": 2, "pointsPerTrial": 40,
        "seeds": [0, 1], "quadratureOrder": 16,
    }))
    out_dir = tmp_path / "results"
    assert run_cli("experiments", "table1", "--config", str(config),
                   "--out", str(out_dir)) == 0
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "trials.jsonl").exists()


def test_missing_seed_is_usage_error():
    proc = subprocess.run(
        [sys.executable, "-m", "magmoments.cli", "datagen", "--kind", "blobs",
         "--n", "5", "--dim", "2", "--out", "/tmp/x.csv"],
        capture_output=True,
    )
    assert proc.returncode == 2


def test_numeric_failure_exits_one(tmp_path, capsys):
    bad = tmp_path / "dup.csv"
    bad.write_text("x0,x1\n0,0\n0,0\n1,1\n")
    assert run_cli("weights", "--input", str(bad), "--t", "1") == 1
    assert "DuplicatePoints" in capsys.readouterr().err


def test_validation_failure_exits_two(tmp_path):
    missing = tmp_path / "nope.csv"
    assert run_cli("weights", "--input", str(missing), "--t", "1") == 2
