"""HTTP JSON API over the store: auth, uploads, training and comparison jobs.

All mutations go through the store; handlers hold no state of their own.
Comparison and training are asynchronous: submission returns 202 with a
job id to poll.  Error mapping: 400 malformed request, 401 unauthenticated,
403 not owner, 404 unknown id, 409 duplicate username, 422 semantic
violation.
"""
# No `from __future__ import annotations` here: stringified annotations
# would stop FastAPI from resolving the closure-scoped dependencies below.

from contextlib import asynccontextmanager
from typing import Annotated

from pathlib import Path

from fastapi import Depends, FastAPI, Form, Header, HTTPException, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .. import ingest, match, topics
from ..store import AuthError, DuplicateKeyError, NotFoundError, Store
from ..textprep import PrepConfig, RawDocument, preprocess_document
from . import jobs, records
from .config import GatewayConfig

__all__ = ["create_app"]

API_VERSION = "1"


class Credentials(BaseModel):
    username: str = Field(min_length=1, max_length=128)
    password: str


class TrainRequest(BaseModel):
    num_topics: int | None = Field(default=None, ge=1)
    seed: int | None = Field(default=None, ge=0)


class CompareParamsBody(BaseModel):
    k: int = Field(default=10, ge=1)
    highlight_threshold: float = Field(default=0.60, ge=0.0, le=1.0)
    relevance_gate_threshold: float = Field(default=0.20, ge=0.0, le=1.0)
    gate_enabled: bool = True


class CompareRequest(BaseModel):
    file_id: str
    dataset_ids: list[str] = Field(min_length=1)
    params: CompareParamsBody = CompareParamsBody()


def create_app(store: Store, config: GatewayConfig | None = None) -> FastAPI:
    config = config or GatewayConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        for _ in range(max(0, config.worker_count)):
            worker = jobs.Worker(store)
            worker.start()
            app.state.workers.append(worker)
        yield
        for worker in app.state.workers:
            worker.stop()
        for worker in app.state.workers:
            worker.join(timeout=2.0)
        app.state.workers = []

    app = FastAPI(title="pipeguard", version=API_VERSION, lifespan=lifespan)
    app.state.store = store
    app.state.config = config
    app.state.workers = []

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # Unparseable body -> 400; well-formed but semantically wrong -> 422.
        malformed = any(e.get("type") == "json_invalid" for e in exc.errors())
        detail = [
            {"loc": [str(p) for p in e.get("loc", [])], "msg": e.get("msg", "")}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400 if malformed else 422, content={"detail": detail})

    def current_user(authorization: Annotated[str | None, Header()] = None) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="authentication required")
        try:
            return store.resolve_session(authorization[len("Bearer ") :])
        except AuthError:
            raise HTTPException(status_code=401, detail="authentication required") from None

    def _get_owned(family: str, key: str, user_id: str, allow_public: bool = False) -> dict:
        try:
            record = store.get(family, key)
        except NotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown {family[:-1]}: {key}") from None
        owner = record.get("owner") or record.get("user_id")
        if owner != user_id and not (allow_public and record.get("public")):
            raise HTTPException(status_code=403, detail="not owner")
        return record

    @app.post("/api/register", status_code=201)
    def register(body: Credentials):
        if len(body.password) < 8:
            raise HTTPException(status_code=422, detail="password must be at least 8 characters")
        try:
            user = store.create_user(body.username, body.password)
        except DuplicateKeyError:
            raise HTTPException(status_code=409, detail="username already exists") from None
        return {"user_id": user.user_id, "username": user.username}

    @app.post("/api/login")
    def login(body: Credentials):
        user = store.verify_login(body.username, body.password)
        if user is None:
            raise HTTPException(status_code=401, detail="invalid credentials")
        session = store.create_session(user.user_id, config.session_ttl)
        return {"token": session.token, "user_id": user.user_id}

    @app.post("/api/logout")
    def logout(
        user_id: Annotated[str, Depends(current_user)],
        authorization: Annotated[str | None, Header()] = None,
    ):
        store.revoke_session(authorization[len("Bearer ") :])
        return {"ok": True}

    @app.post("/api/files", status_code=201)
    async def upload_file(file: UploadFile, user_id: Annotated[str, Depends(current_user)]):
        raw = await file.read()
        filename = file.filename or "upload.txt"
        doc = preprocess_document(
            RawDocument(doc_id=filename, source=filename, raw_text=raw.decode("utf-8", "replace"))
        )
        file_id = store.next_id("file")
        records.save_file(store, file_id, user_id, filename, raw, doc)
        return {"file_id": file_id, "filename": filename, "tokens": len(doc.tokens)}

    @app.get("/api/files")
    def list_files(user_id: Annotated[str, Depends(current_user)]):
        out = []
        for key in store.list_keys("files"):
            record = store.get("files", key)
            if record["user_id"] == user_id:
                out.append(
                    {
                        "file_id": record["file_id"],
                        "filename": record["filename"],
                        "uploaded_at": record["uploaded_at"],
                    }
                )
        return {"files": out}

    @app.post("/api/datasets", status_code=201)
    async def upload_dataset(
        csv: UploadFile,
        name: Annotated[str, Form(min_length=1)],
        user_id: Annotated[str, Depends(current_user)],
    ):
        raw = await csv.read()
        try:
            rows, row_errors = ingest.load_dataset_table(raw)
        except ingest.TableError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        policy = ingest.FetchPolicy(
            timeout=config.fetch_timeout,
            offline_mode=config.offline_mode,
            cache_dir=config.resolved_cache_dir(),
        )
        dataset_id = store.next_id("dataset")
        dataset = ingest.ingest_dataset(name, rows, policy, PrepConfig(), dataset_id=dataset_id)
        records.save_dataset(store, dataset, owner=user_id)
        return {
            "dataset_id": dataset_id,
            "name": name,
            "status": dataset.status,
            "documents": len(dataset.documents),
            "row_errors": [[i, m] for i, m in row_errors],
            "fetch_failures": [[i, m] for i, m in dataset.fetch_failures],
        }

    @app.get("/api/datasets")
    def list_datasets(user_id: Annotated[str, Depends(current_user)]):
        out = []
        for key in store.list_keys("datasets"):
            record = store.get("datasets", key)
            if record["owner"] == user_id or record.get("public"):
                out.append(records.dataset_summary(record))
        return {"datasets": out}

    @app.post("/api/datasets/{dataset_id}/train", status_code=202)
    def train_dataset_endpoint(
        dataset_id: str,
        body: TrainRequest,
        user_id: Annotated[str, Depends(current_user)],
    ):
        record = _get_owned("datasets", dataset_id, user_id)
        if record["status"] not in ("ingested", "trained"):
            raise HTTPException(status_code=422, detail=f"dataset not ready: {record['status']}")
        job = jobs.submit_train_job(store, user_id, dataset_id, body.num_topics, body.seed)
        return {"job_id": job["job_id"], "state": job["state"]}

    @app.get("/api/datasets/{dataset_id}/topics")
    def dataset_topics(
        dataset_id: str,
        user_id: Annotated[str, Depends(current_user)],
        words: int = 10,
    ):
        record = _get_owned("datasets", dataset_id, user_id, allow_public=True)
        if record["status"] != "trained":
            raise HTTPException(status_code=422, detail="dataset not trained")
        model, dictionary = topics.load_model(store.get_latest_model(dataset_id).container)
        return {
            "dataset_id": dataset_id,
            "num_topics": model.num_topics,
            "topics": [
                {
                    "topic": k,
                    "words": [
                        {"token": token, "probability": prob}
                        for token, prob in topics.top_words(model, k, words, dictionary)
                    ],
                }
                for k in range(model.num_topics)
            ],
        }

    @app.post("/api/compare", status_code=202)
    def submit_compare(body: CompareRequest, user_id: Annotated[str, Depends(current_user)]):
        _get_owned("files", body.file_id, user_id)
        for dataset_id in body.dataset_ids:
            _get_owned("datasets", dataset_id, user_id, allow_public=True)
        try:
            params = match.CompareParams(
                k=body.params.k,
                highlight_threshold=body.params.highlight_threshold,
                relevance_gate_threshold=body.params.relevance_gate_threshold,
                gate_enabled=body.params.gate_enabled,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        job = jobs.submit_compare_job(store, user_id, body.file_id, body.dataset_ids, params)
        return {"job_id": job["job_id"], "state": job["state"]}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str, user_id: Annotated[str, Depends(current_user)]):
        job = _get_owned("jobs", job_id, user_id)
        out = {
            "job_id": job["job_id"],
            "kind": job["kind"],
            "state": job["state"],
            "submitted_at": job["submitted_at"],
            "finished_at": job["finished_at"],
        }
        if job["state"] == "failed":
            out["error"] = job["error"]
        if job["state"] == "done" and job["kind"] == "compare":
            out["report"] = job["report"]
        if job["state"] == "done" and job["kind"] == "train":
            out["result"] = job["payload"].get("result")
        return out

    @app.get("/api/jobs/{job_id}/report")
    def get_report(job_id: str, user_id: Annotated[str, Depends(current_user)]):
        job = _get_owned("jobs", job_id, user_id)
        if job["state"] != "done" or not job.get("report"):
            raise HTTPException(status_code=404, detail="report not available")
        return job["report"]

    # Optional same-origin hosting of the browser console; /api keeps
    # precedence because it was registered first.
    if config.console_dir and Path(config.console_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.console_dir, html=True), name="console")

    return app
