import json

import numpy as np
import pytest

from qgad.cli import SEED_ENV_VAR, ingest, main, read_matrix
from qgad.errors import DegenerateDataError, FormatError


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)


@pytest.fixture
def train_csv(tmp_path):
    rng = np.random.default_rng(0)
    rows = rng.uniform(-0.8, 0.8, size=(8, 2))
    path = tmp_path / "train.csv"
    path.write_text("\n".join(f"{float(a)!r},{float(b)!r}" for a, b in rows) + "\n")
    return path


def run_fit(train_csv, tmp_path, *extra):
    artifact = tmp_path / "model.json"
    code = main(
        ["fit", "--input", str(train_csv), "--bits", "4", "--output", str(artifact), *extra]
    )
    assert code == 0
    return json.loads(artifact.read_text()), artifact


def test_read_matrix_parses_and_reports_positions(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("0.5,0.25\n\n-0.5,0.125\n")
    got = read_matrix(str(path))
    np.testing.assert_array_equal(got, [[0.5, 0.25], [-0.5, 0.125]])
    path.write_text("0.5,0.25\n0.1,oops\n")
    with pytest.raises(FormatError, match="line 2, column 2"):
        read_matrix(str(path))
    path.write_text("0.5,0.25\n0.1\n")
    with pytest.raises(FormatError, match="line 2"):
        read_matrix(str(path))


def test_read_matrix_skip_header(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("x,y\n0.5,0.25\n0.1,0.2\n")
    assert read_matrix(str(path), skip_header=True).shape == (2, 2)
    with pytest.raises(FormatError):
        read_matrix(str(path))


def test_ingest_requires_two_rows(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("0.5,0.25\n")
    with pytest.raises(DegenerateDataError):
        ingest(str(path), 4)


def test_fit_artifact_structure(train_csv, tmp_path):
    artifact, _ = run_fit(train_csv, tmp_path)
    assert artifact["kind"] == "qgad-fit"
    assert len(artifact["config_hash"]) == 64
    assert artifact["ingest"]["rows"] == 8
    assert artifact["estimate"]["positive_definite"] is True
    assert len(artifact["training_densities"]) == 8
    assert artifact["deltas"]["max_abs_mu"] < 1e-10
    assert artifact["deltas"]["max_abs_cov"] < 1e-10
    np.testing.assert_allclose(
        artifact["estimate"]["mu_hat"], artifact["classical"]["mu"], atol=1e-10
    )


def test_fit_is_bit_identical_per_seed(train_csv, tmp_path):
    _, first = run_fit(train_csv, tmp_path, "--backend", "shots", "--shots", "2000")
    second = tmp_path / "again.json"
    code = main(
        [
            "fit", "--input", str(train_csv), "--bits", "4",
            "--backend", "shots", "--shots", "2000", "--output", str(second),
        ]
    )
    assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_seed_resolution(train_csv, tmp_path, monkeypatch):
    artifact, _ = run_fit(train_csv, tmp_path)
    assert artifact["config"]["seed"] == 0
    monkeypatch.setenv(SEED_ENV_VAR, "7")
    artifact, _ = run_fit(train_csv, tmp_path)
    assert artifact["config"]["seed"] == 7
    artifact, _ = run_fit(train_csv, tmp_path, "--seed", "9")
    assert artifact["config"]["seed"] == 9
    monkeypatch.setenv(SEED_ENV_VAR, "not-a-number")
    assert main(["fit", "--input", str(train_csv), "--bits", "4"]) == 1


def test_fit_epsilon_allocates_resolution(train_csv, tmp_path):
    artifact, _ = run_fit(train_csv, tmp_path, "--epsilon", "0.5")
    assert artifact["config"]["epsilon"] == 0.5
    assert 0.0 < artifact["config"]["epsilon_mu"] < 1.0


def test_detect_flags_the_outlier(train_csv, tmp_path):
    _, artifact = run_fit(train_csv, tmp_path)
    queries = tmp_path / "queries.csv"
    queries.write_text("0.0,0.0\n5.0,-5.0\n")
    verdicts = tmp_path / "verdicts.json"
    code = main(
        ["detect", "--model", str(artifact), "--input", str(queries),
         "--output", str(verdicts)]
    )
    assert code == 0
    result = json.loads(verdicts.read_text())
    assert result["kind"] == "qgad-detect"
    assert result["policy"] == {"threshold": None, "quantile": 1.0}
    assert [row["anomaly"] for row in result["rows"]] == [False, True]
    assert result["summary"] == {"rows": 2, "anomalies": 1}


def test_detect_explicit_threshold(train_csv, tmp_path):
    _, artifact = run_fit(train_csv, tmp_path)
    queries = tmp_path / "queries.csv"
    queries.write_text("5.0,-5.0\n")
    verdicts = tmp_path / "verdicts.json"
    code = main(
        ["detect", "--model", str(artifact), "--input", str(queries),
         "--threshold", "1e-6", "--output", str(verdicts)]
    )
    assert code == 0
    assert json.loads(verdicts.read_text())["rows"][0]["anomaly"] is True


def test_detect_empty_query_file(train_csv, tmp_path):
    _, artifact = run_fit(train_csv, tmp_path)
    queries = tmp_path / "queries.csv"
    queries.write_text("\n")
    verdicts = tmp_path / "verdicts.json"
    code = main(
        ["detect", "--model", str(artifact), "--input", str(queries),
         "--output", str(verdicts)]
    )
    assert code == 0
    assert json.loads(verdicts.read_text())["rows"] == []


def test_detect_refuses_degenerate_artifact(train_csv, tmp_path):
    artifact, path = run_fit(train_csv, tmp_path)
    artifact["estimate"]["positive_definite"] = False
    path.write_text(json.dumps(artifact))
    queries = tmp_path / "queries.csv"
    queries.write_text("0.0,0.0\n")
    assert main(["detect", "--model", str(path), "--input", str(queries)]) == 2


def test_detect_dimension_mismatch(train_csv, tmp_path):
    _, artifact = run_fit(train_csv, tmp_path)
    queries = tmp_path / "queries.csv"
    queries.write_text("0.0,0.0,0.0\n")
    assert main(["detect", "--model", str(artifact), "--input", str(queries)]) == 2


def test_detect_rejects_non_artifacts(tmp_path):
    bogus = tmp_path / "bogus.json"
    bogus.write_text("{not json")
    queries = tmp_path / "queries.csv"
    queries.write_text("0.0\n")
    assert main(["detect", "--model", str(bogus), "--input", str(queries)]) == 1
    bogus.write_text('{"kind": "something-else"}')
    assert main(["detect", "--model", str(bogus), "--input", str(queries)]) == 1


def test_usage_errors_exit_one(train_csv, tmp_path):
    assert main(["fit", "--bits", "4"]) == 1  # missing --input
    assert main(["frobnicate"]) == 1
    assert (
        main(
            ["fit", "--input", str(train_csv), "--bits", "4",
             "--epsilon", "0.1", "--epsilon-mu", "0.1"]
        )
        == 1
    )
    _, artifact = run_fit(train_csv, tmp_path)
    queries = tmp_path / "queries.csv"
    queries.write_text("0.0,0.0\n")
    assert (
        main(
            ["detect", "--model", str(artifact), "--input", str(queries),
             "--threshold", "0.1", "--quantile", "1.0"]
        )
        == 1
    )


def test_io_and_data_errors(tmp_path):
    assert main(["fit", "--input", str(tmp_path / "missing.csv"), "--bits", "4"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("0.5,abc\n0.1,0.2\n")
    assert main(["fit", "--input", str(bad), "--bits", "4"]) == 1
    single = tmp_path / "single.csv"
    single.write_text("0.5,0.25\n")
    assert main(["fit", "--input", str(single), "--bits", "4"]) == 2
    out_of_range = tmp_path / "range.csv"
    out_of_range.write_text("0.5,0.25\n1.5,0.25\n")
    assert main(["fit", "--input", str(out_of_range), "--bits", "4"]) == 2


def test_verify_single_suite(capsys):
    assert main(["verify", "--suite", "comparator"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[PASS] comparator")


def test_scaling_writes_csv(tmp_path, capsys):
    out = tmp_path / "scaling.csv"
    code = main(
        ["scaling", "--shots-grid", "100,1000,10000", "--repeats", "20",
         "--output", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "shots,feature,rmse,slope"
    assert len(lines) == 1 + 3 * 2  # grid points x features
    for line in lines[1:]:
        shots, feature, rmse, slope = line.split(",")
        assert int(shots) in (100, 1000, 10000)
        assert float(rmse) > 0 and float(slope) < 0
    assert "slope" in capsys.readouterr().err


def test_scaling_validation():
    assert main(["scaling", "--shots-grid", "100,200"]) == 1
    assert main(["scaling", "--shots-grid", "100,200,300"]) == 1  # span too small
    assert main(["scaling", "--shots-grid", "100,1000,banana"]) == 1
    assert main(["scaling", "--repeats", "5"]) == 1


def test_version_flag():
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
