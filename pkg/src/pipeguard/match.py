"""Cosine ranking of a query document against ingested datasets.

A comparison runs in two stages.  First a cheap topic-space gate: the
query's inferred topic mixture is compared against each dataset's centroid
mixture, and datasets below the relevance threshold are skipped (recorded
in the report, with an off switch).  Then a full scan: the query is
TF-IDF-weighted with each surviving dataset's own idf and cosine-scored
against every document, and the per-dataset rankings merge into one
global top-k.  Scores stay in [0, 1]; similarity above the highlight
threshold flags a probable security concern.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import topics
from .corpus import TfidfVector, tfidf_weights, to_bow
from .ingest import Dataset
from .textprep import CleanDocument

__all__ = [
    "MatchResult",
    "CompareParams",
    "DatasetGate",
    "ComparisonReport",
    "MatchError",
    "cosine",
    "cosine_dense",
    "dataset_relevance",
    "top_k",
    "compare",
    "report_to_dict",
    "report_to_json",
]


class MatchError(ValueError):
    pass


@dataclass(frozen=True)
class MatchResult:
    dataset_name: str
    doc_id: str
    document_link: str
    similarity: float
    rank: int


@dataclass(frozen=True)
class CompareParams:
    k: int = 10
    highlight_threshold: float = 0.60
    relevance_gate_threshold: float = 0.20
    gate_enabled: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for name in ("highlight_threshold", "relevance_gate_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


@dataclass(frozen=True)
class DatasetGate:
    name: str
    relevance: float
    gated: bool


@dataclass
class ComparisonReport:
    job_id: str
    file_ref: str
    params: CompareParams
    datasets: list[DatasetGate]
    results: list[MatchResult]
    highlights: list[MatchResult]
    generated_at: str


def cosine(a: TfidfVector, b: TfidfVector) -> float:
    """Cosine of two sparse nonnegative vectors over the same index space.

    The dot product walks the index intersection in ascending term order,
    so the result is bit-identical regardless of argument order.  Either
    norm being zero yields 0; float drift is clamped into [0, 1].
    """
    ea, eb = a.entries, b.entries
    dot = 0.0
    i = j = 0
    while i < len(ea) and j < len(eb):
        ta, wa = ea[i]
        tb, wb = eb[j]
        if ta == tb:
            dot += wa * wb
            i += 1
            j += 1
        elif ta < tb:
            i += 1
        else:
            j += 1
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    return min(max(dot / (a.norm * b.norm), 0.0), 1.0)


def cosine_dense(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine for dense nonnegative vectors (topic mixtures)."""
    norm_a = math.sqrt(float(np.dot(a, a)))
    norm_b = math.sqrt(float(np.dot(b, b)))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return min(max(float(np.dot(a, b)) / (norm_a * norm_b), 0.0), 1.0)


def dataset_relevance(query_theta: np.ndarray, dataset: Dataset) -> float:
    """Topic-space closeness of a query to a dataset's training centroid."""
    if dataset.model is None:
        raise MatchError("model missing")
    centroid = dataset.model.training_doc_topics.mean(axis=0)
    centroid = centroid / centroid.sum()
    return cosine_dense(query_theta, centroid)


def top_k(query: CleanDocument, dataset: Dataset, params: CompareParams | None = None) -> list[MatchResult]:
    """Rank every dataset document against the query by TF-IDF cosine.

    The query is weighted with the dataset's own idf.  Ties break by
    ascending doc_id; fewer than k documents returns them all.
    """
    params = params or CompareParams()
    if not dataset.vectors:
        return []
    bow = to_bow(query, dataset.dictionary)
    query_vec = tfidf_weights(bow, dataset.dictionary)
    scored = [(cosine(query_vec, vec), vec.doc_id) for vec in dataset.vectors]
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [
        MatchResult(
            dataset_name=dataset.name,
            doc_id=doc_id,
            document_link=dataset.link_for(doc_id),
            similarity=similarity,
            rank=rank,
        )
        for rank, (similarity, doc_id) in enumerate(scored[: params.k], start=1)
    ]


def compare(
    query: CleanDocument,
    datasets: list[Dataset],
    params: CompareParams | None = None,
    job_id: str = "",
    file_ref: str = "",
) -> ComparisonReport:
    """Gate, scan and merge: the full comparison over one or more datasets."""
    if not datasets:
        raise MatchError("no datasets selected")
    params = params or CompareParams()

    gates: list[DatasetGate] = []
    merged: list[MatchResult] = []
    for dataset in datasets:
        if dataset.model is None:
            raise MatchError(f"model missing for dataset {dataset.name!r}")
        bow = to_bow(query, dataset.dictionary)
        theta = topics.infer(dataset.model, bow, seed=dataset.model.config.seed)
        relevance = dataset_relevance(theta, dataset)
        gated = params.gate_enabled and relevance < params.relevance_gate_threshold
        gates.append(DatasetGate(name=dataset.name, relevance=relevance, gated=gated))
        if not gated:
            merged.extend(top_k(query, dataset, params))

    merged.sort(key=lambda r: (-r.similarity, r.dataset_name, r.doc_id))
    results = [
        MatchResult(
            dataset_name=r.dataset_name,
            doc_id=r.doc_id,
            document_link=r.document_link,
            similarity=r.similarity,
            rank=rank,
        )
        for rank, r in enumerate(merged[: params.k], start=1)
    ]
    highlights = [r for r in results if r.similarity > params.highlight_threshold]
    return ComparisonReport(
        job_id=job_id,
        file_ref=file_ref,
        params=params,
        datasets=gates,
        results=results,
        highlights=highlights,
        generated_at=datetime.now(timezone.utc).isoformat(),
    )


def report_to_dict(report: ComparisonReport) -> dict:
    return {
        "job_id": report.job_id,
        "file": report.file_ref,
        "params": {
            "k": report.params.k,
            "highlight_threshold": report.params.highlight_threshold,
            "relevance_gate_threshold": report.params.relevance_gate_threshold,
            "gate_enabled": report.params.gate_enabled,
        },
        "datasets": [
            {"name": g.name, "relevance": g.relevance, "gated": g.gated}
            for g in report.datasets
        ],
        "results": [
            {
                "rank": r.rank,
                "dataset_name": r.dataset_name,
                "doc_id": r.doc_id,
                "link": r.document_link,
                "similarity": r.similarity,
            }
            for r in report.results
        ],
        "highlights": [
            {"dataset_name": r.dataset_name, "doc_id": r.doc_id}
            for r in report.highlights
        ],
        "generated_at": report.generated_at,
    }


def report_to_json(report_dict: dict) -> str:
    """Canonical report serialization used by the CLI and stored job records."""
    return json.dumps(report_dict, indent=2, ensure_ascii=False) + "\n"
