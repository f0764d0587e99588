"""
Command-line lifecycle: dataset -> train -> eval-estimator -> estimator-driven run
"""
import json

import pytest
import yaml

from src.main import EXIT_BREACHES, EXIT_CONFIG, EXIT_OK, main
from tests.conftest import scenario_config

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("lifecycle")


@pytest.fixture(scope="module")
def estimator_path(workdir):
    dataset = workdir / "dataset.joblib"
    assert main(
        ["dataset", "--per-mode", "32", "--seed", "1", "--out", str(dataset), "--csv", str(workdir / "dataset.csv")]
    ) == EXIT_OK
    estimator = workdir / "estimator.joblib"
    assert main(["train", "--dataset", str(dataset), "--quantiles", "4", "--out", str(estimator)]) == EXIT_OK
    return estimator


def test_dataset_export_has_every_mode(workdir, estimator_path):
    lines = (workdir / "dataset.csv").read_text().splitlines()
    assert len(lines) == 1 + 8 * 32
    assert lines[0].startswith("mode_id,")


def test_training_writes_metrics(estimator_path):
    metrics = json.loads(estimator_path.with_suffix(".metrics.json").read_text())
    assert metrics["n_train"] + metrics["n_test"] == 256
    assert 0.0 <= metrics["feasibility_safety"] <= 1.0


def test_eval_with_open_bars(workdir, estimator_path):
    assert main(["eval-estimator", "--estimator", str(estimator_path), "--min-spearman", "-1"]) == EXIT_OK
    code = main(
        [
            "eval-estimator",
            "--estimator",
            str(estimator_path),
            "--dataset",
            str(workdir / "dataset.joblib"),
            "--min-spearman",
            "-1",
        ]
    )
    assert code == EXIT_OK


def test_estimator_drives_a_run(workdir, estimator_path):
    config = scenario_config(name="estimator-day", evaluator="estimator", estimator_path=str(estimator_path))
    path = workdir / "estimator_day.yaml"
    path.write_text(yaml.safe_dump(config))
    out = workdir / "estimator-run"

    assert main(["run", "--scenario", str(path), "--out", str(out)]) in (EXIT_OK, EXIT_BREACHES)
    report = json.loads((out / "report.json").read_text())
    assert report["scenario"]["evaluator"] == "estimator"
    assert report["totals"]["evaluations"] > 0


def test_short_trace_is_rejected_before_running(tmp_path):
    trace = tmp_path / "short.csv"
    assert main(["gen-trace", "--profile", "week1", "--days", "1", "--seed", "2", "--out", str(trace)]) == EXIT_OK

    config = scenario_config(days=3, trace={"path": str(trace)})
    path = tmp_path / "long.yaml"
    path.write_text(yaml.safe_dump(config))
    out = tmp_path / "never"

    assert main(["run", "--scenario", str(path), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_unknown_policy_is_a_config_error(tmp_path):
    path = tmp_path / "day.yaml"
    path.write_text(yaml.safe_dump(scenario_config()))
    assert main(["run", "--scenario", str(path), "--policy", "fastest", "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_estimator_class_count_must_match(workdir, estimator_path):
    config = scenario_config(name="estimator-day", evaluator="estimator", estimator_path=str(estimator_path))
    path = workdir / "estimator_quantiles.yaml"
    path.write_text(yaml.safe_dump(config))
    out = workdir / "mismatched"

    assert main(["run", "--scenario", str(path), "--quantiles", "10", "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
