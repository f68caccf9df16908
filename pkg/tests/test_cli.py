import json

import pytest
from click.testing import CliRunner

from cpd.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def simulate(runner, tmp_path, family="piecewise_constant", n=300, seed=1):
    data = tmp_path / "data.csv"
    truth = tmp_path / "truth.csv"
    result = runner.invoke(main, [
        "simulate", "--family", family, "--n", str(n), "--seed", str(seed),
        "--out", str(data), "--truth-out", str(truth)])
    assert result.exit_code == 0, result.output
    return data, truth, json.loads(result.output)


class TestSimulate:
    def test_writes_csv_and_truth(self, runner, tmp_path):
        data, truth, payload = simulate(runner, tmp_path)
        assert data.exists() and truth.exists()
        assert len(payload["truth"]) == 6


class TestDetect:
    def test_detect_and_eval_flow(self, runner, tmp_path):
        data, truth, payload = simulate(runner, tmp_path)
        pred = tmp_path / "pred.csv"
        result = runner.invoke(main, [
            "detect", "--input", str(data), "--method", "pelt", "--cost", "l2",
            "--penalty", "5", "--truth", str(truth), "--out", str(pred)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["metrics"]["f1"] == 1.0

        evald = runner.invoke(main, [
            "eval", "--truth", str(truth), "--pred", str(pred),
            "--n", "300", "--margin-pct", "1"])
        assert evald.exit_code == 0, evald.output
        assert json.loads(evald.output)["f1"] == 1.0

    def test_win_method(self, runner, tmp_path):
        data, truth, _ = simulate(runner, tmp_path, n=600, seed=2)
        result = runner.invoke(main, [
            "detect", "--input", str(data), "--method", "win",
            "--half-width", "50", "--penalty", "5", "--truth", str(truth)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["metrics"]["f1"] > 0.5


class TestSweep:
    def test_sweep_reports_best(self, runner, tmp_path):
        data, truth, _ = simulate(runner, tmp_path)
        result = runner.invoke(main, [
            "sweep", "--input", str(data), "--method", "pelt", "--cost", "l2",
            "--grid", "0.5,5,50,5e11", "--truth", str(truth)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert len(body["rows"]) == 4
        assert body["rows"][body["best_index"]]["metrics"]["f1"] == 1.0

    def test_sweep_requires_truth(self, runner, tmp_path):
        data, _, _ = simulate(runner, tmp_path)
        result = runner.invoke(main, ["sweep", "--input", str(data)])
        assert result.exit_code != 0


class TestBayes:
    def test_bayes_detection(self, runner, tmp_path):
        data, truth, _ = simulate(runner, tmp_path, n=200, seed=3)
        prob = tmp_path / "prob.csv"
        result = runner.invoke(main, [
            "bayes", "--input", str(data), "--k-max", "8",
            "--truth", str(truth), "--posterior-out", str(prob)])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["metrics"]["f1"] >= 0.8
        assert prob.exists()
        header = prob.read_text().splitlines()[0]
        assert header == "index,probability"
