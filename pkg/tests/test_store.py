import pytest

from pipeguard.store import (
    AuthError,
    DuplicateKeyError,
    NotFoundError,
    Store,
    StoreError,
    hash_password,
    verify_password,
)


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path)
    yield s
    s.close()


class TestEntities:
    def test_put_get_round_trip(self, store):
        record = {"dataset_id": "d1", "name": "x", "nested": {"a": [1, 2.5, "s"]}}
        store.put("datasets", "d1", record)
        assert store.get("datasets", "d1") == record

    def test_get_unknown(self, store):
        with pytest.raises(NotFoundError):
            store.get("datasets", "nope")

    def test_delete(self, store):
        store.put("files", "f1", {"x": 1})
        store.delete("files", "f1")
        with pytest.raises(NotFoundError):
            store.get("files", "f1")
        with pytest.raises(NotFoundError):
            store.delete("files", "f1")

    def test_list_keys_sorted_with_prefix(self, store):
        for key in ("b/2", "a/1", "b/1"):
            store.put("documents", key, {})
        assert store.list_keys("documents") == ["a/1", "b/1", "b/2"]
        assert store.list_keys("documents", prefix="b/") == ["b/1", "b/2"]

    def test_replace_false_rejects_duplicates(self, store):
        store.put("files", "f1", {"v": 1}, replace=False)
        with pytest.raises(DuplicateKeyError):
            store.put("files", "f1", {"v": 2}, replace=False)

    def test_unknown_family(self, store):
        with pytest.raises(StoreError):
            store.put("widgets", "w", {})

    def test_durability_across_reopen(self, tmp_path):
        s1 = Store(tmp_path)
        s1.put("datasets", "d1", {"name": "persisted"})
        s1.close()
        s2 = Store(tmp_path)
        assert s2.get("datasets", "d1") == {"name": "persisted"}
        s2.close()

    def test_future_on_disk_version_rejected(self, tmp_path):
        import sqlite3

        s = Store(tmp_path)
        s.close()
        conn = sqlite3.connect(tmp_path / "store.db")
        conn.execute("PRAGMA user_version = 99")
        conn.close()
        with pytest.raises(StoreError, match="on-disk format"):
            Store(tmp_path)

    def test_float_fidelity(self, store):
        record = {"weights": [0.1, 2.0 / 3.0, 1e-17, 12345.6789]}
        store.put("vectors", "v", record)
        assert store.get("vectors", "v") == record


class TestPasswords:
    def test_round_trip(self):
        h = hash_password("correct horse battery")
        assert verify_password("correct horse battery", h)

    def test_wrong_password(self):
        h = hash_password("correct horse battery")
        assert not verify_password("wrong horse", h)

    def test_fresh_salt_per_hash(self):
        p = "correct horse battery"
        h1, h2 = hash_password(p), hash_password(p)
        assert h1 != h2
        assert verify_password(p, h1) and verify_password(p, h2)

    def test_parameters_encoded(self):
        h = hash_password("longenough")
        assert h.startswith("scrypt$ln=")
        algo, params, salt, digest = h.split("$")
        assert "r=" in params and "p=" in params

    def test_length_bounds(self):
        with pytest.raises(ValueError):
            hash_password("short")
        with pytest.raises(ValueError):
            hash_password("x" * 1025)
        hash_password("x" * 8)  # boundary ok

    def test_garbage_hash_verifies_false(self):
        assert not verify_password("whatever!", "not-a-hash")
        assert not verify_password("whatever!", "md5$x$y$z")


class TestUsers:
    def test_create_and_login(self, store):
        user = store.create_user("alice", "alicepassword")
        assert user.user_id == "user-000001"
        assert store.verify_login("alice", "alicepassword").user_id == user.user_id
        assert store.verify_login("alice", "wrongpassword") is None
        assert store.verify_login("nobody", "alicepassword") is None

    def test_duplicate_username(self, store):
        store.create_user("alice", "alicepassword")
        with pytest.raises(DuplicateKeyError):
            store.create_user("alice", "otherpassword")

    def test_no_plaintext_in_store(self, tmp_path):
        secrets_used = ["hunter2hunter2", "tr0ub4dor&3extra", "correct horse battery staple"]
        s = Store(tmp_path)
        for i, password in enumerate(secrets_used):
            s.create_user(f"user{i}", password)
        s.close()
        blob = b"".join(p.read_bytes() for p in tmp_path.glob("store.db*"))
        assert blob  # sanity: the database exists
        for password in secrets_used:
            assert password.encode() not in blob


class TestSessions:
    def test_create_resolve(self, store):
        session = store.create_session("user-000001", ttl_seconds=60)
        assert len(session.token) >= 32
        assert store.resolve_session(session.token) == "user-000001"

    def test_expiry(self, tmp_path):
        clock = {"t": 1000.0}
        s = Store(tmp_path, now_fn=lambda: clock["t"])
        session = s.create_session("u", ttl_seconds=10)
        assert s.resolve_session(session.token) == "u"
        clock["t"] = 1011.0
        with pytest.raises(AuthError):
            s.resolve_session(session.token)
        s.close()

    def test_revoke(self, store):
        session = store.create_session("u", ttl_seconds=60)
        store.revoke_session(session.token)
        with pytest.raises(AuthError):
            store.resolve_session(session.token)

    def test_garbage_token(self, store):
        with pytest.raises(AuthError):
            store.resolve_session("garbage")

    def test_tokens_unique(self, store):
        tokens = {store.create_session("u", 60).token for _ in range(50)}
        assert len(tokens) == 50


class TestModels:
    def test_versions_monotonic(self, store):
        r1 = store.put_model("ds1", b"\x01container-one")
        r2 = store.put_model("ds1", b"\x02container-two")
        assert (r1.version, r2.version) == (1, 2)
        assert store.list_model_versions("ds1") == [1, 2]
        latest = store.get_latest_model("ds1")
        assert latest.version == 2
        assert latest.container == b"\x02container-two"

    def test_bytes_verbatim(self, store):
        payload = bytes(range(256)) * 3
        store.put_model("ds2", payload)
        assert store.get_latest_model("ds2").container == payload

    def test_missing_model(self, store):
        with pytest.raises(NotFoundError):
            store.get_latest_model("never-trained")

    def test_per_dataset_isolation(self, store):
        store.put_model("a", b"a1")
        store.put_model("b", b"b1")
        store.put_model("a", b"a2")
        assert store.get_latest_model("b").container == b"b1"
        assert store.get_latest_model("a").version == 2


def _job(job_id, state="queued", **extra):
    return {"job_id": job_id, "state": state, "lease_expires_at": None, **extra}


class TestJobs:
    def test_legal_lifecycle(self, store):
        store.put("jobs", "j1", _job("j1"))
        store.put("jobs", "j1", _job("j1", "running"))
        store.put("jobs", "j1", _job("j1", "done"))

    def test_new_job_must_be_queued(self, store):
        with pytest.raises(StoreError):
            store.put("jobs", "j1", _job("j1", "running"))

    def test_illegal_transitions(self, store):
        store.put("jobs", "j1", _job("j1"))
        with pytest.raises(StoreError):
            store.put("jobs", "j1", _job("j1", "done"))  # queued -> done
        store.put("jobs", "j1", _job("j1", "running"))
        store.put("jobs", "j1", _job("j1", "failed"))
        with pytest.raises(StoreError):
            store.put("jobs", "j1", _job("j1", "running"))  # failed is terminal

    def test_claim_fifo_and_lease(self, tmp_path):
        clock = {"t": 0.0}
        s = Store(tmp_path, now_fn=lambda: clock["t"])
        s.put("jobs", "job-000001", _job("job-000001"))
        s.put("jobs", "job-000002", _job("job-000002"))
        first = s.claim_next_job(lease_ttl=100)
        assert first["job_id"] == "job-000001"
        second = s.claim_next_job(lease_ttl=100)
        assert second["job_id"] == "job-000002"
        assert s.claim_next_job(lease_ttl=100) is None  # both leased
        clock["t"] = 200.0  # leases expired: both reclaimable
        assert s.claim_next_job(lease_ttl=100)["job_id"] == "job-000001"
        s.close()

    def test_counter_ids(self, store):
        assert store.next_id("job") == "job-000001"
        assert store.next_id("job") == "job-000002"
        assert store.next_id("file") == "file-000001"
