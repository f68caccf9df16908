import pytest
from fastapi.testclient import TestClient

from cpd.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


@pytest.fixture
def dataset(client):
    resp = client.post("/datasets", json={
        "sim": {"family": "piecewise_constant", "n": 400, "seed": 0}})
    assert resp.status_code == 200
    return resp.json()


class TestDatasets:
    def test_register_simulated(self, dataset):
        assert dataset["n"] == 400
        assert len(dataset["truth"]) == 6

    def test_register_csv(self, client):
        csv_text = "t,a\n" + "\n".join(f"{i},{float(i % 7)}" for i in range(40))
        resp = client.post("/datasets", json={
            "csv_text": csv_text, "time_column": "t", "value_columns": ["a"],
            "truth": [20]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["n"] == 40
        assert body["truth"] == [20]

    def test_get_dataset(self, client, dataset):
        resp = client.get(f"/datasets/{dataset['id']}")
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["series"][0]["values"]) == 400

    def test_unknown_dataset_404(self, client):
        assert client.get("/datasets/nope").status_code == 404

    def test_bad_request_400(self, client):
        assert client.post("/datasets", json={}).status_code == 400
        resp = client.post("/datasets", json={"sim": {"family": "bogus"}})
        assert resp.status_code == 422


class TestDetect:
    def test_pelt_detection_with_metrics(self, client, dataset):
        resp = client.post("/detect", json={
            "dataset": dataset["id"], "method": "pelt", "cost": "l2",
            "penalty": 5.0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["metrics"]["f1"] == 1.0
        assert body["revision"] == 1
        assert body["change_points"] == dataset["truth"]

    def test_revision_increments(self, client, dataset):
        first = client.post("/detect", json={
            "dataset": dataset["id"], "penalty": 5.0}).json()
        second = client.post("/detect", json={
            "dataset": dataset["id"], "penalty": 50.0}).json()
        assert second["revision"] == first["revision"] + 1

    def test_detection_error_422(self, client):
        csv_text = "t,a\n0,1\n1,2\n2,3\n3,4\n"
        ds = client.post("/datasets", json={
            "csv_text": csv_text, "time_column": "t",
            "value_columns": ["a"]}).json()
        resp = client.post("/detect", json={
            "dataset": ds["id"], "method": "win", "penalty": 1.0,
            "half_width": 100})
        assert resp.status_code == 422

    def test_unknown_dataset(self, client):
        resp = client.post("/detect", json={"dataset": "missing", "penalty": 1.0})
        assert resp.status_code == 404


class TestBayesEndpoints:
    def test_posterior_peaks_flow(self, client, dataset):
        resp = client.post("/bayes/posterior", json={
            "dataset": dataset["id"], "k_max": 8})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["cp_prob"]) == 400
        assert max(body["cp_prob"]) <= 1.0

        peaks = client.post("/bayes/peaks", json={
            "dataset": dataset["id"], "threshold": 0.2, "distance": 10})
        assert peaks.status_code == 200
        assert peaks.json()["metrics"]["f1"] >= 0.8

        cleared = client.post("/bayes/peaks", json={
            "dataset": dataset["id"], "threshold": 1.0, "distance": 10})
        assert cleared.json()["change_points"] == []

    def test_peaks_before_posterior_422(self, client, dataset):
        resp = client.post("/bayes/peaks", json={"dataset": dataset["id"]})
        assert resp.status_code == 422

    def test_fuse_identity_and_boost(self, client, dataset):
        client.post("/bayes/posterior", json={"dataset": dataset["id"], "k_max": 8})
        base = client.post("/posterior/fuse", json={
            "dataset": dataset["id"], "user_belief": [0.5] * 400}).json()
        boosted = client.post("/posterior/fuse", json={
            "dataset": dataset["id"],
            "user_belief": [0.9 if i == 33 else 0.5 for i in range(400)]}).json()
        assert boosted["cp_prob"][33] >= base["cp_prob"][33]

    def test_fuse_wrong_length_400(self, client, dataset):
        client.post("/bayes/posterior", json={"dataset": dataset["id"], "k_max": 8})
        resp = client.post("/posterior/fuse", json={
            "dataset": dataset["id"], "user_belief": [0.5] * 17})
        assert resp.status_code == 400


class TestAnnotations:
    def test_add_remove_cycle_restores_prediction(self, client, dataset):
        detect = client.post("/detect", json={
            "dataset": dataset["id"], "penalty": 5.0}).json()
        before = detect["change_points"]
        added = client.post("/annotations", json={
            "dataset": dataset["id"], "action": "add", "index": 123}).json()
        assert 123 in added["change_points"]
        removed = client.post("/annotations", json={
            "dataset": dataset["id"], "action": "remove", "index": 123}).json()
        assert removed["change_points"] == before
        assert removed["revision"] == detect["revision"] + 2

    def test_metrics_follow_edits(self, client, dataset):
        client.post("/detect", json={"dataset": dataset["id"], "penalty": 5.0})
        spoiled = client.post("/annotations", json={
            "dataset": dataset["id"], "action": "add", "index": 37}).json()
        assert spoiled["metrics"]["precision"] < 1.0

    def test_remove_missing_point_422(self, client, dataset):
        resp = client.post("/annotations", json={
            "dataset": dataset["id"], "action": "remove", "index": 1})
        assert resp.status_code == 422

    def test_bad_action_400(self, client, dataset):
        resp = client.post("/annotations", json={
            "dataset": dataset["id"], "action": "frobnicate", "index": 1})
        assert resp.status_code == 400


class TestSweepEndpoint:
    def test_sweep_rows(self, client, dataset):
        resp = client.get(f"/sweep/{dataset['id']}", params={
            "method": "pelt", "cost": "l2"})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["rows"]) > 50
        best = body["rows"][body["best_index"]]
        assert best["metrics"]["f1"] == 1.0

    def test_sweep_needs_truth(self, client):
        csv_text = "t,a\n" + "\n".join(f"{i},{float(i)}" for i in range(30))
        ds = client.post("/datasets", json={
            "csv_text": csv_text, "time_column": "t",
            "value_columns": ["a"]}).json()
        assert client.get(f"/sweep/{ds['id']}").status_code == 422
