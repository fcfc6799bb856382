import time

import pytest
from fastapi.testclient import TestClient

from pipeguard.gateway.api import create_app
from pipeguard.gateway.config import GatewayConfig
from pipeguard.gateway import jobs
from pipeguard.store import Store

from conftest import FIXTURES


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "data")
    yield s
    s.close()


@pytest.fixture
def client(store, tmp_path):
    config = GatewayConfig(
        data_dir=str(tmp_path / "data"),
        offline_mode=True,
        cache_dir=str(FIXTURES / "cache"),
        worker_count=0,  # tests drive the queue explicitly
    )
    app = create_app(store, config)
    with TestClient(app) as c:
        yield c


def register_and_login(client, username="alice", password="alicepassword"):
    response = client.post("/api/register", json={"username": username, "password": password})
    assert response.status_code == 201
    response = client.post("/api/login", json={"username": username, "password": password})
    assert response.status_code == 200
    token = response.json()["token"]
    return {"Authorization": f"Bearer {token}"}


def upload_dataset(client, auth, name="supply-chain", table="supply_chain.csv"):
    csv_bytes = (FIXTURES / "tables" / table).read_bytes()
    response = client.post(
        "/api/datasets",
        files={"csv": (table, csv_bytes, "text/csv")},
        data={"name": name},
        headers=auth,
    )
    assert response.status_code == 201, response.text
    return response.json()


def upload_file(client, auth, filename="release_notes.txt"):
    body = (FIXTURES / filename).read_bytes()
    response = client.post(
        "/api/files", files={"file": (filename, body, "text/plain")}, headers=auth
    )
    assert response.status_code == 201
    return response.json()


class TestAuthEndpoints:
    def test_register_login_logout(self, client):
        auth = register_and_login(client)
        assert client.post("/api/logout", headers=auth).status_code == 200
        # token revoked immediately
        assert client.get("/api/files", headers=auth).status_code == 401

    def test_register_duplicate_409(self, client):
        client.post("/api/register", json={"username": "bob", "password": "bobpassword"})
        response = client.post(
            "/api/register", json={"username": "bob", "password": "otherpassword"}
        )
        assert response.status_code == 409

    def test_register_short_password_422(self, client):
        response = client.post("/api/register", json={"username": "carol", "password": "short"})
        assert response.status_code == 422

    def test_malformed_json_400(self, client):
        response = client.post(
            "/api/register", content=b"{not json", headers={"Content-Type": "application/json"}
        )
        assert response.status_code == 400

    def test_login_wrong_password_401(self, client):
        client.post("/api/register", json={"username": "dave", "password": "davepassword"})
        response = client.post("/api/login", json={"username": "dave", "password": "wrongwrong"})
        assert response.status_code == 401

    def test_login_unknown_user_401(self, client):
        response = client.post("/api/login", json={"username": "ghost", "password": "whatever1"})
        assert response.status_code == 401

    @pytest.mark.parametrize(
        "method,path",
        [
            ("get", "/api/files"),
            ("get", "/api/datasets"),
            ("post", "/api/compare"),
            ("get", "/api/jobs/job-000001"),
            ("post", "/api/logout"),
        ],
    )
    def test_auth_required_401(self, client, method, path):
        assert getattr(client, method)(path).status_code == 401

    def test_garbage_token_401(self, client):
        headers = {"Authorization": "Bearer garbage"}
        assert client.get("/api/files", headers=headers).status_code == 401


class TestFiles:
    def test_upload_and_list(self, client):
        auth = register_and_login(client)
        uploaded = upload_file(client, auth)
        assert uploaded["file_id"] == "file-000001"
        assert uploaded["tokens"] > 0
        listing = client.get("/api/files", headers=auth).json()
        assert [f["file_id"] for f in listing["files"]] == ["file-000001"]


class TestDatasets:
    def test_upload_ingests_offline(self, client):
        auth = register_and_login(client)
        result = upload_dataset(client, auth)
        assert result["status"] == "ingested"
        assert result["documents"] == 12
        assert result["fetch_failures"] == []

    def test_upload_missing_reference_column_422(self, client):
        auth = register_and_login(client)
        response = client.post(
            "/api/datasets",
            files={"csv": ("bad.csv", b"url,title\nhttps://x.example,t\n", "text/csv")},
            data={"name": "bad"},
            headers=auth,
        )
        assert response.status_code == 422

    def test_list_datasets(self, client):
        auth = register_and_login(client)
        upload_dataset(client, auth)
        listing = client.get("/api/datasets", headers=auth).json()["datasets"]
        assert len(listing) == 1
        assert listing[0]["name"] == "supply-chain"
        assert listing[0]["status"] == "ingested"

    def test_broken_rows_reported(self, client):
        auth = register_and_login(client)
        result = upload_dataset(client, auth, name="two-cluster", table="two_cluster.csv")
        assert result["documents"] == 40
        assert len(result["fetch_failures"]) == 1  # the dead link row


class TestTrainAndTopics:
    def test_train_job_lifecycle(self, client, store):
        auth = register_and_login(client)
        dataset_id = upload_dataset(client, auth)["dataset_id"]
        response = client.post(
            f"/api/datasets/{dataset_id}/train", json={"seed": 42}, headers=auth
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        assert response.json()["state"] == "queued"

        polled = client.get(f"/api/jobs/{job_id}", headers=auth).json()
        assert polled["state"] in ("queued", "running")

        assert jobs.run_pending(store) == 1
        polled = client.get(f"/api/jobs/{job_id}", headers=auth).json()
        assert polled["state"] == "done"
        assert polled["result"]["model_version"] == 1

    def test_train_unknown_dataset_404(self, client):
        auth = register_and_login(client)
        assert (
            client.post("/api/datasets/dataset-999999/train", json={}, headers=auth).status_code
            == 404
        )

    def test_train_failed_dataset_422(self, client):
        auth = register_and_login(client)
        response = client.post(
            "/api/datasets",
            files={
                "csv": (
                    "dead.csv",
                    b"reference\nhttps://fixtures.invalid/nothing-here\n",
                    "text/csv",
                )
            },
            data={"name": "dead"},
            headers=auth,
        )
        dataset_id = response.json()["dataset_id"]
        assert response.json()["status"] == "failed"
        response = client.post(f"/api/datasets/{dataset_id}/train", json={}, headers=auth)
        assert response.status_code == 422

    def test_topics_endpoint(self, client, store):
        auth = register_and_login(client)
        dataset_id = upload_dataset(client, auth)["dataset_id"]
        # before training: semantic violation
        assert client.get(f"/api/datasets/{dataset_id}/topics", headers=auth).status_code == 422
        client.post(f"/api/datasets/{dataset_id}/train", json={"seed": 42}, headers=auth)
        jobs.run_pending(store)
        response = client.get(
            f"/api/datasets/{dataset_id}/topics", params={"words": 3}, headers=auth
        )
        assert response.status_code == 200
        payload = response.json()
        assert payload["num_topics"] == 10
        assert len(payload["topics"]) == 10
        assert all(len(t["words"]) == 3 for t in payload["topics"])

    def test_topics_unknown_dataset_404(self, client):
        auth = register_and_login(client)
        assert client.get("/api/datasets/zzz/topics", headers=auth).status_code == 404


class TestCompare:
    def _prepare(self, client, store, auth):
        file_id = upload_file(client, auth)["file_id"]
        dataset_id = upload_dataset(client, auth)["dataset_id"]
        client.post(f"/api/datasets/{dataset_id}/train", json={"seed": 42}, headers=auth)
        jobs.run_pending(store)
        return file_id, dataset_id

    def test_compare_flow(self, client, store):
        auth = register_and_login(client)
        file_id, dataset_id = self._prepare(client, store, auth)
        response = client.post(
            "/api/compare",
            json={"file_id": file_id, "dataset_ids": [dataset_id], "params": {}},
            headers=auth,
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        assert client.get(f"/api/jobs/{job_id}", headers=auth).json()["state"] == "queued"

        jobs.run_pending(store)
        polled = client.get(f"/api/jobs/{job_id}", headers=auth).json()
        assert polled["state"] == "done"
        report = polled["report"]
        assert report["results"][0]["doc_id"] == "doc-00002"
        assert report["results"][0]["similarity"] > 0.60
        assert report["file"] == "release_notes.txt"

        fetched = client.get(f"/api/jobs/{job_id}/report", headers=auth)
        assert fetched.status_code == 200
        assert fetched.json() == report

    def test_compare_empty_dataset_ids_422(self, client, store):
        auth = register_and_login(client)
        file_id, _ = self._prepare(client, store, auth)
        response = client.post(
            "/api/compare", json={"file_id": file_id, "dataset_ids": []}, headers=auth
        )
        assert response.status_code == 422

    def test_compare_unknown_file_404(self, client, store):
        auth = register_and_login(client)
        _, dataset_id = self._prepare(client, store, auth)
        response = client.post(
            "/api/compare",
            json={"file_id": "file-999999", "dataset_ids": [dataset_id]},
            headers=auth,
        )
        assert response.status_code == 404

    def test_compare_unknown_dataset_404(self, client, store):
        auth = register_and_login(client)
        file_id, _ = self._prepare(client, store, auth)
        response = client.post(
            "/api/compare",
            json={"file_id": file_id, "dataset_ids": ["dataset-999999"]},
            headers=auth,
        )
        assert response.status_code == 404

    def test_compare_untrained_dataset_fails_job(self, client, store):
        auth = register_and_login(client)
        file_id = upload_file(client, auth)["file_id"]
        dataset_id = upload_dataset(client, auth)["dataset_id"]  # not trained
        response = client.post(
            "/api/compare",
            json={"file_id": file_id, "dataset_ids": [dataset_id]},
            headers=auth,
        )
        job_id = response.json()["job_id"]
        jobs.run_pending(store)
        polled = client.get(f"/api/jobs/{job_id}", headers=auth).json()
        assert polled["state"] == "failed"
        assert "train dataset first" in polled["error"]
        # no report available for a failed job
        assert client.get(f"/api/jobs/{job_id}/report", headers=auth).status_code == 404

    def test_unknown_job_404(self, client):
        auth = register_and_login(client)
        assert client.get("/api/jobs/job-424242", headers=auth).status_code == 404
        assert client.get("/api/jobs/job-424242/report", headers=auth).status_code == 404


class TestOwnership:
    def test_cross_user_access_403(self, client, store):
        alice = register_and_login(client, "alice", "alicepassword")
        file_id = upload_file(client, alice)["file_id"]
        dataset_id = upload_dataset(client, alice)["dataset_id"]
        job_id = client.post(
            f"/api/datasets/{dataset_id}/train", json={}, headers=alice
        ).json()["job_id"]

        mallory = register_and_login(client, "mallory", "mallorypassword")
        assert client.get(f"/api/jobs/{job_id}", headers=mallory).status_code == 403
        assert (
            client.post(
                f"/api/datasets/{dataset_id}/train", json={}, headers=mallory
            ).status_code
            == 403
        )
        response = client.post(
            "/api/compare",
            json={"file_id": file_id, "dataset_ids": [dataset_id]},
            headers=mallory,
        )
        assert response.status_code == 403
        # datasets list does not leak others' private datasets
        listing = client.get("/api/datasets", headers=mallory).json()["datasets"]
        assert listing == []


class TestConsoleMount:
    def test_static_console_served_next_to_api(self, tmp_path):
        console = tmp_path / "console"
        console.mkdir()
        (console / "index.html").write_text("<html><body>console shell</body></html>")
        store = Store(tmp_path / "data")
        config = GatewayConfig(
            data_dir=str(tmp_path / "data"), worker_count=0, console_dir=str(console)
        )
        with TestClient(create_app(store, config)) as client:
            page = client.get("/")
            assert page.status_code == 200
            assert "console shell" in page.text
            # API routes keep precedence over the static mount
            assert client.get("/api/datasets").status_code == 401
        store.close()

    def test_no_console_dir_means_no_root_route(self, client):
        assert client.get("/").status_code == 404


class TestBackgroundWorker:
    def test_worker_thread_completes_jobs(self, tmp_path):
        store = Store(tmp_path / "data")
        config = GatewayConfig(
            data_dir=str(tmp_path / "data"),
            offline_mode=True,
            cache_dir=str(FIXTURES / "cache"),
            worker_count=1,
        )
        app = create_app(store, config)
        with TestClient(app) as client:
            auth = register_and_login(client)
            dataset_id = upload_dataset(client, auth)["dataset_id"]
            job_id = client.post(
                f"/api/datasets/{dataset_id}/train", json={"seed": 7}, headers=auth
            ).json()["job_id"]
            deadline = time.time() + 30
            state = "queued"
            while time.time() < deadline:
                state = client.get(f"/api/jobs/{job_id}", headers=auth).json()["state"]
                if state in ("done", "failed"):
                    break
                time.sleep(0.1)
            assert state == "done"
        store.close()
