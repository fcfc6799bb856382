"""Durable persistence: entities, users, sessions, versioned model containers.

Backed by an embedded sqlite database in the data directory, so tests and
single-node deployments need no external server; the public surface is
engine-agnostic.  Credentials are stored only as salted scrypt hashes with
the parameters encoded in the hash string; session tokens come from the
OS CSPRNG and expire server-side.
"""
from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import secrets
import sqlite3
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

__all__ = [
    "Store",
    "StoreError",
    "NotFoundError",
    "DuplicateKeyError",
    "AuthError",
    "UserAccount",
    "SessionToken",
    "StoredModelRecord",
    "hash_password",
    "verify_password",
]

FAMILIES = ("datasets", "documents", "vectors", "files", "jobs")

ON_DISK_VERSION = 1

_SCRYPT_LOG_N = 14
_SCRYPT_R = 8
_SCRYPT_P = 1
_SCRYPT_MAXMEM = 64 * 1024 * 1024

_JOB_TRANSITIONS = {
    "queued": {"queued", "running"},
    "running": {"running", "done", "failed"},
    "done": set(),
    "failed": set(),
}


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class DuplicateKeyError(StoreError):
    pass


class AuthError(StoreError):
    """Single indistinguishable rejection for unknown/expired/revoked tokens."""


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    username: str
    credential_hash: str
    created_at: str


@dataclass(frozen=True)
class SessionToken:
    token: str
    user_id: str
    expires_at: float


@dataclass(frozen=True)
class StoredModelRecord:
    model_id: str
    dataset_id: str
    version: int
    container: bytes
    created_at: str


def hash_password(plaintext: str) -> str:
    """Salted scrypt hash, parameters encoded in the string."""
    if not 8 <= len(plaintext) <= 1024:
        raise ValueError("password must be 8..1024 characters")
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(
        plaintext.encode("utf-8"),
        salt=salt,
        n=1 << _SCRYPT_LOG_N,
        r=_SCRYPT_R,
        p=_SCRYPT_P,
        maxmem=_SCRYPT_MAXMEM,
        dklen=32,
    )
    salt_b64 = base64.urlsafe_b64encode(salt).decode().rstrip("=")
    digest_b64 = base64.urlsafe_b64encode(digest).decode().rstrip("=")
    return f"scrypt$ln={_SCRYPT_LOG_N},r={_SCRYPT_R},p={_SCRYPT_P}${salt_b64}${digest_b64}"


def _b64pad(data: str) -> bytes:
    return base64.urlsafe_b64decode(data + "=" * (-len(data) % 4))


def verify_password(plaintext: str, credential_hash: str) -> bool:
    try:
        algo, params, salt_b64, digest_b64 = credential_hash.split("$")
        if algo != "scrypt":
            return False
        kv = dict(part.split("=") for part in params.split(","))
        salt = _b64pad(salt_b64)
        expected = _b64pad(digest_b64)
        digest = hashlib.scrypt(
            plaintext.encode("utf-8"),
            salt=salt,
            n=1 << int(kv["ln"]),
            r=int(kv["r"]),
            p=int(kv["p"]),
            maxmem=_SCRYPT_MAXMEM,
            dklen=len(expected),
        )
    except (ValueError, KeyError):
        return False
    return hmac.compare_digest(digest, expected)


class Store:
    """Single-process store; safe for concurrent handlers and workers."""

    def __init__(self, data_dir: str | Path, now_fn=time.time):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.now = now_fn
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(
            self.data_dir / "store.db", check_same_thread=False
        )
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA synchronous=NORMAL")
        self._init_schema()

    def _init_schema(self) -> None:
        with self._lock, self._conn:
            (found,) = self._conn.execute("PRAGMA user_version").fetchone()
            if found == 0:
                self._conn.execute(f"PRAGMA user_version = {ON_DISK_VERSION}")
            elif found > ON_DISK_VERSION:
                raise StoreError(
                    f"data directory uses on-disk format {found}, this build supports {ON_DISK_VERSION}"
                )
            self._conn.executescript(
                """
                CREATE TABLE IF NOT EXISTS entities (
                    family TEXT NOT NULL,
                    key TEXT NOT NULL,
                    payload TEXT NOT NULL,
                    PRIMARY KEY (family, key)
                );
                CREATE TABLE IF NOT EXISTS users (
                    user_id TEXT PRIMARY KEY,
                    username TEXT NOT NULL UNIQUE,
                    credential_hash TEXT NOT NULL,
                    created_at TEXT NOT NULL
                );
                CREATE TABLE IF NOT EXISTS sessions (
                    token TEXT PRIMARY KEY,
                    user_id TEXT NOT NULL,
                    expires_at REAL NOT NULL
                );
                CREATE TABLE IF NOT EXISTS models (
                    model_id TEXT PRIMARY KEY,
                    dataset_id TEXT NOT NULL,
                    version INTEGER NOT NULL,
                    container BLOB NOT NULL,
                    created_at TEXT NOT NULL,
                    UNIQUE (dataset_id, version)
                );
                CREATE TABLE IF NOT EXISTS counters (
                    name TEXT PRIMARY KEY,
                    value INTEGER NOT NULL
                );
                """
            )

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- generic entity families ------------------------------------------

    def _check_family(self, family: str) -> None:
        if family not in FAMILIES:
            raise StoreError(f"unknown entity family: {family}")

    def put(self, family: str, key: str, value: dict, replace: bool = True) -> None:
        self._check_family(family)
        payload = json.dumps(value, ensure_ascii=False)
        if family == "jobs":
            self._check_job_transition(key, value)
        with self._lock, self._conn:
            if replace:
                self._conn.execute(
                    "INSERT OR REPLACE INTO entities (family, key, payload) VALUES (?, ?, ?)",
                    (family, key, payload),
                )
            else:
                try:
                    self._conn.execute(
                        "INSERT INTO entities (family, key, payload) VALUES (?, ?, ?)",
                        (family, key, payload),
                    )
                except sqlite3.IntegrityError:
                    raise DuplicateKeyError(f"{family}/{key} already exists") from None

    def get(self, family: str, key: str) -> dict:
        self._check_family(family)
        with self._lock:
            row = self._conn.execute(
                "SELECT payload FROM entities WHERE family = ? AND key = ?",
                (family, key),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"{family}/{key} not found")
        return json.loads(row[0])

    def list_keys(self, family: str, prefix: str = "") -> list[str]:
        self._check_family(family)
        with self._lock:
            rows = self._conn.execute(
                "SELECT key FROM entities WHERE family = ? AND key LIKE ? ORDER BY key",
                (family, prefix + "%"),
            ).fetchall()
        return [r[0] for r in rows]

    def delete(self, family: str, key: str) -> None:
        self._check_family(family)
        with self._lock, self._conn:
            cursor = self._conn.execute(
                "DELETE FROM entities WHERE family = ? AND key = ?", (family, key)
            )
            if cursor.rowcount == 0:
                raise NotFoundError(f"{family}/{key} not found")

    def claim_next_job(self, lease_ttl: float) -> dict | None:
        """Atomically lease the oldest runnable job (FIFO by id).

        Runnable means queued, or running with an expired lease (a worker
        died mid-run); execution is at-least-once.
        """
        now = self.now()
        with self._lock, self._conn:
            rows = self._conn.execute(
                "SELECT key, payload FROM entities WHERE family = 'jobs' ORDER BY key"
            ).fetchall()
            for key, payload in rows:
                job = json.loads(payload)
                expired = job.get("lease_expires_at") or 0
                if job["state"] == "queued" or (
                    job["state"] == "running" and expired <= now
                ):
                    job["state"] = "running"
                    job["lease_expires_at"] = now + lease_ttl
                    self._conn.execute(
                        "UPDATE entities SET payload = ? WHERE family = 'jobs' AND key = ?",
                        (json.dumps(job, ensure_ascii=False), key),
                    )
                    return job
        return None

    def _check_job_transition(self, key: str, value: dict) -> None:
        new_state = value.get("state")
        if new_state not in _JOB_TRANSITIONS:
            raise StoreError(f"invalid job state: {new_state!r}")
        try:
            old_state = self.get("jobs", key).get("state")
        except NotFoundError:
            if new_state != "queued":
                raise StoreError(f"new job must start queued, not {new_state!r}") from None
            return
        if new_state == old_state:
            return
        if new_state not in _JOB_TRANSITIONS[old_state]:
            raise StoreError(f"illegal job transition {old_state} -> {new_state}")

    # -- deterministic ids -------------------------------------------------

    def next_id(self, kind: str) -> str:
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT value FROM counters WHERE name = ?", (kind,)
            ).fetchone()
            value = (row[0] if row else 0) + 1
            self._conn.execute(
                "INSERT OR REPLACE INTO counters (name, value) VALUES (?, ?)",
                (kind, value),
            )
        return f"{kind}-{value:06d}"

    # -- users and sessions --------------------------------------------------

    def create_user(self, username: str, password: str) -> UserAccount:
        credential_hash = hash_password(password)
        user = UserAccount(
            user_id=self.next_id("user"),
            username=username,
            credential_hash=credential_hash,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        with self._lock, self._conn:
            try:
                self._conn.execute(
                    "INSERT INTO users (user_id, username, credential_hash, created_at)"
                    " VALUES (?, ?, ?, ?)",
                    (user.user_id, user.username, user.credential_hash, user.created_at),
                )
            except sqlite3.IntegrityError:
                raise DuplicateKeyError(f"username {username!r} already exists") from None
        return user

    def get_user(self, username: str) -> UserAccount:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, username, credential_hash, created_at FROM users"
                " WHERE username = ?",
                (username,),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"user {username!r} not found")
        return UserAccount(*row)

    def verify_login(self, username: str, password: str) -> UserAccount | None:
        try:
            user = self.get_user(username)
        except NotFoundError:
            return None
        return user if verify_password(password, user.credential_hash) else None

    def create_session(self, user_id: str, ttl_seconds: float) -> SessionToken:
        session = SessionToken(
            token=secrets.token_urlsafe(32),
            user_id=user_id,
            expires_at=self.now() + ttl_seconds,
        )
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions (token, user_id, expires_at) VALUES (?, ?, ?)",
                (session.token, session.user_id, session.expires_at),
            )
        return session

    def resolve_session(self, token: str) -> str:
        with self._lock:
            row = self._conn.execute(
                "SELECT user_id, expires_at FROM sessions WHERE token = ?", (token,)
            ).fetchone()
        if row is None or row[1] <= self.now():
            raise AuthError("invalid session")
        return row[0]

    def revoke_session(self, token: str) -> None:
        with self._lock, self._conn:
            self._conn.execute("DELETE FROM sessions WHERE token = ?", (token,))

    # -- model containers ---------------------------------------------------

    def put_model(self, dataset_id: str, container: bytes) -> StoredModelRecord:
        """Store a new model version; older versions are retained."""
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT MAX(version) FROM models WHERE dataset_id = ?", (dataset_id,)
            ).fetchone()
            version = (row[0] or 0) + 1
            record = StoredModelRecord(
                model_id=f"{dataset_id}@v{version}",
                dataset_id=dataset_id,
                version=version,
                container=container,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            self._conn.execute(
                "INSERT INTO models (model_id, dataset_id, version, container, created_at)"
                " VALUES (?, ?, ?, ?, ?)",
                (
                    record.model_id,
                    record.dataset_id,
                    record.version,
                    record.container,
                    record.created_at,
                ),
            )
        return record

    def get_latest_model(self, dataset_id: str) -> StoredModelRecord:
        with self._lock:
            row = self._conn.execute(
                "SELECT model_id, dataset_id, version, container, created_at FROM models"
                " WHERE dataset_id = ? ORDER BY version DESC LIMIT 1",
                (dataset_id,),
            ).fetchone()
        if row is None:
            raise NotFoundError(f"no model for dataset {dataset_id!r}")
        return StoredModelRecord(row[0], row[1], row[2], bytes(row[3]), row[4])

    def list_model_versions(self, dataset_id: str) -> list[int]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT version FROM models WHERE dataset_id = ? ORDER BY version",
                (dataset_id,),
            ).fetchall()
        return [r[0] for r in rows]
