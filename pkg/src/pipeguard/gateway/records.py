"""Mapping between domain objects and stored entity records.

Datasets split across three families: the dataset record (rows, status,
dictionary), one document record per fetched page, and one vector record
per document.  Model containers live in the store's versioned model table
and are reattached on load.
"""
from __future__ import annotations

import base64
from datetime import datetime, timezone

from ..corpus import Dictionary, TfidfVector, to_bow
from ..ingest import Dataset, DatasetTableRow
from ..store import NotFoundError, Store
from ..textprep import CleanDocument
from .. import topics

__all__ = ["save_dataset", "load_dataset", "save_file", "load_file_document", "dataset_summary"]


def save_dataset(store: Store, dataset: Dataset, owner: str, public: bool = False) -> None:
    record = {
        "dataset_id": dataset.dataset_id,
        "name": dataset.name,
        "owner": owner,
        "public": public,
        "status": dataset.status,
        "rows": [
            {"reference": r.reference, "title": r.title, "date": r.date, "notes": r.notes}
            for r in dataset.rows
        ],
        "fetch_failures": [[index, message] for index, message in dataset.fetch_failures],
        "prep": dataset.prep_meta,
        "dictionary_b64": base64.b64encode(dataset.dictionary.to_bytes()).decode(),
        "doc_ids": [doc.doc_id for doc in dataset.documents],
    }
    store.put("datasets", dataset.dataset_id, record)
    for doc in dataset.documents:
        store.put(
            "documents",
            f"{dataset.dataset_id}/{doc.doc_id}",
            {
                "doc_id": doc.doc_id,
                "summary": doc.summary,
                "tokens": list(doc.tokens),
                "source": dataset.doc_sources.get(doc.doc_id, ""),
            },
        )
    for vec in dataset.vectors:
        store.put(
            "vectors",
            f"{dataset.dataset_id}/{vec.doc_id}",
            {
                "doc_id": vec.doc_id,
                "entries": [[t, w] for t, w in vec.entries],
                "norm": vec.norm,
            },
        )


def load_dataset(store: Store, dataset_id: str, with_model: bool = True) -> Dataset:
    record = store.get("datasets", dataset_id)
    dictionary = Dictionary.from_bytes(base64.b64decode(record["dictionary_b64"]))
    dataset = Dataset(
        dataset_id=record["dataset_id"],
        name=record["name"],
        rows=[DatasetTableRow(**row) for row in record["rows"]],
        dictionary=dictionary,
        fetch_failures=[(int(i), m) for i, m in record["fetch_failures"]],
        status=record["status"],
        prep_meta=record.get("prep", {}),
    )
    for doc_id in record["doc_ids"]:
        doc_record = store.get("documents", f"{dataset_id}/{doc_id}")
        doc = CleanDocument(
            doc_id=doc_record["doc_id"],
            summary=doc_record["summary"],
            tokens=tuple(doc_record["tokens"]),
        )
        dataset.documents.append(doc)
        dataset.doc_sources[doc.doc_id] = doc_record.get("source", "")
        dataset.bows.append(to_bow(doc, dictionary))
        vec_record = store.get("vectors", f"{dataset_id}/{doc_id}")
        dataset.vectors.append(
            TfidfVector(
                doc_id=vec_record["doc_id"],
                entries=tuple((int(t), float(w)) for t, w in vec_record["entries"]),
                norm=float(vec_record["norm"]),
            )
        )
    if with_model and dataset.status == "trained":
        container = store.get_latest_model(dataset_id).container
        model, _ = topics.load_model(container)
        dataset.model = model
    return dataset


def dataset_summary(record: dict) -> dict:
    return {
        "dataset_id": record["dataset_id"],
        "name": record["name"],
        "status": record["status"],
        "documents": len(record["doc_ids"]),
        "failures": len(record["fetch_failures"]),
        "public": record.get("public", False),
    }


def save_file(store: Store, file_id: str, user_id: str, filename: str, raw: bytes, doc: CleanDocument) -> dict:
    record = {
        "file_id": file_id,
        "user_id": user_id,
        "filename": filename,
        "raw_b64": base64.b64encode(raw).decode(),
        "summary": doc.summary,
        "tokens": list(doc.tokens),
        "uploaded_at": datetime.now(timezone.utc).isoformat(),
    }
    store.put("files", file_id, record)
    return record


def load_file_document(record: dict) -> CleanDocument:
    # doc_id is the original filename so inference streams match between a
    # stored upload and the same file passed to the CLI directly.
    return CleanDocument(
        doc_id=record["filename"],
        summary=record["summary"],
        tokens=tuple(record["tokens"]),
    )
