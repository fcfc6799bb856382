"""Store-backed job queue: training and comparison run asynchronously.

Jobs move queued -> running -> done|failed, leased to one worker at a time
with a timeout so a crashed worker's job gets picked up again.  Execution
is idempotent (training and comparison are deterministic), so at-least-once
delivery is safe.
"""
from __future__ import annotations

import threading
import traceback
from datetime import datetime, timezone

from .. import match, topics
from ..store import NotFoundError, Store
from ..topics import LdaConfig
from ..ingest import train_dataset
from . import records

__all__ = [
    "submit_compare_job",
    "submit_train_job",
    "run_job",
    "run_pending",
    "Worker",
]

DEFAULT_LEASE_TTL = 300.0


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def submit_compare_job(
    store: Store,
    user_id: str,
    file_id: str,
    dataset_ids: list[str],
    params: match.CompareParams,
) -> dict:
    job = {
        "job_id": store.next_id("job"),
        "kind": "compare",
        "user_id": user_id,
        "state": "queued",
        "payload": {
            "file_id": file_id,
            "dataset_ids": list(dataset_ids),
            "params": {
                "k": params.k,
                "highlight_threshold": params.highlight_threshold,
                "relevance_gate_threshold": params.relevance_gate_threshold,
                "gate_enabled": params.gate_enabled,
            },
        },
        "report": None,
        "error": None,
        "submitted_at": _now_iso(),
        "finished_at": None,
        "lease_expires_at": None,
    }
    store.put("jobs", job["job_id"], job)
    return job


def submit_train_job(
    store: Store,
    user_id: str,
    dataset_id: str,
    num_topics: int | None = None,
    seed: int | None = None,
) -> dict:
    job = {
        "job_id": store.next_id("job"),
        "kind": "train",
        "user_id": user_id,
        "state": "queued",
        "payload": {
            "dataset_id": dataset_id,
            "num_topics": num_topics,
            "seed": seed,
        },
        "report": None,
        "error": None,
        "submitted_at": _now_iso(),
        "finished_at": None,
        "lease_expires_at": None,
    }
    store.put("jobs", job["job_id"], job)
    return job


def _execute_compare(store: Store, job: dict) -> dict:
    payload = job["payload"]
    file_record = store.get("files", payload["file_id"])
    query = records.load_file_document(file_record)
    datasets = []
    for dataset_id in payload["dataset_ids"]:
        dataset = records.load_dataset(store, dataset_id)
        if dataset.model is None:
            raise match.MatchError(f"train dataset first: {dataset.name!r} has no model")
        datasets.append(dataset)
    params = match.CompareParams(**payload["params"])
    report = match.compare(
        query,
        datasets,
        params,
        job_id=job["job_id"],
        file_ref=file_record["filename"],
    )
    return match.report_to_dict(report)


def _execute_train(store: Store, job: dict) -> dict:
    payload = job["payload"]
    dataset = records.load_dataset(store, payload["dataset_id"], with_model=False)
    kwargs = {}
    if payload.get("num_topics") is not None:
        kwargs["num_topics"] = payload["num_topics"]
    if payload.get("seed") is not None:
        kwargs["seed"] = payload["seed"]
    config = LdaConfig(**kwargs)
    train_dataset(dataset, config)
    container = topics.save_model(dataset.model, dataset.dictionary)
    record = store.put_model(dataset.dataset_id, container)
    ds_record = store.get("datasets", dataset.dataset_id)
    ds_record["status"] = "trained"
    ds_record["model_version"] = record.version
    store.put("datasets", dataset.dataset_id, ds_record)
    return {"dataset_id": dataset.dataset_id, "model_version": record.version}


def run_job(store: Store, job: dict) -> dict:
    """Execute a leased job to completion and persist the outcome."""
    try:
        if job["kind"] == "compare":
            job["report"] = _execute_compare(store, job)
        elif job["kind"] == "train":
            job["payload"]["result"] = _execute_train(store, job)
        else:
            raise ValueError(f"unknown job kind: {job['kind']}")
        job["state"] = "done"
    except (match.MatchError, topics.CorpusError, NotFoundError, ValueError) as exc:
        job["state"] = "failed"
        job["error"] = str(exc)
    except Exception as exc:  # unexpected: keep the queue alive, fail the job
        job["state"] = "failed"
        job["error"] = f"internal: {exc}\n{traceback.format_exc()}"
    job["finished_at"] = _now_iso()
    job["lease_expires_at"] = None
    store.put("jobs", job["job_id"], job)
    return job


def run_pending(store: Store, lease_ttl: float = DEFAULT_LEASE_TTL) -> int:
    """Drain the queue synchronously; returns the number of jobs run."""
    count = 0
    while True:
        job = store.claim_next_job(lease_ttl)
        if job is None:
            return count
        run_job(store, job)
        count += 1


class Worker(threading.Thread):
    """Background polling worker; one job at a time per worker."""

    def __init__(self, store: Store, poll_interval: float = 0.2, lease_ttl: float = DEFAULT_LEASE_TTL):
        super().__init__(daemon=True)
        self.store = store
        self.poll_interval = poll_interval
        self.lease_ttl = lease_ttl
        # name avoids shadowing threading.Thread's private _stop method
        self._stop_event = threading.Event()

    def stop(self) -> None:
        self._stop_event.set()

    def run(self) -> None:
        while not self._stop_event.is_set():
            job = self.store.claim_next_job(self.lease_ttl)
            if job is None:
                self._stop_event.wait(self.poll_interval)
                continue
            run_job(self.store, job)
