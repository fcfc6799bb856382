"""Dataset ingestion: reference tables, page fetching and text extraction.

A dataset starts as a CSV table of web references.  Each row is fetched
(or read from a content-addressed fixture cache in offline mode), reduced
to plain text, preprocessed, and vectorized.  Broken rows are recorded,
not fatal: one dead link must not kill a corpus.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urlparse

import requests

from .corpus import BowVector, Dictionary, TfidfVector, build_dictionary, compute_tfidf, to_bow
from .textprep import CleanDocument, PrepConfig, RawDocument, preprocess_document, stopword_list_hash
from .topics import LdaConfig, LdaModel
from . import topics

__all__ = [
    "DatasetTableRow",
    "Dataset",
    "FetchPolicy",
    "FetchError",
    "TableError",
    "load_dataset_table",
    "fetch_url",
    "extract_text",
    "ingest_dataset",
    "train_dataset",
    "cache_key",
]


class TableError(ValueError):
    """The reference table itself is unusable (bad schema, empty file)."""


class FetchError(Exception):
    """A single page could not be retrieved; ``code`` names the cause."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class DatasetTableRow:
    reference: str
    title: str | None = None
    date: str | None = None
    notes: str | None = None


@dataclass
class FetchPolicy:
    timeout: float = 20.0
    max_bytes: int = 5 * 1024 * 1024
    retries: int = 2
    offline_mode: bool = False
    cache_dir: str | Path | None = None
    max_redirects: int = 5
    parallelism: int = 4

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_bytes <= 0:
            raise ValueError("max_bytes must be > 0")


@dataclass
class Dataset:
    dataset_id: str
    name: str
    rows: list[DatasetTableRow]
    documents: list[CleanDocument] = field(default_factory=list)
    bows: list[BowVector] = field(default_factory=list)
    vectors: list[TfidfVector] = field(default_factory=list)
    dictionary: Dictionary = field(default_factory=Dictionary)
    model: LdaModel | None = None
    fetch_failures: list[tuple[int, str]] = field(default_factory=list)
    status: str = "ingesting"  # ingesting | ingested | trained | failed
    doc_sources: dict[str, str] = field(default_factory=dict)
    prep_meta: dict = field(default_factory=dict)

    def link_for(self, doc_id: str) -> str:
        return self.doc_sources.get(doc_id, "")


def _valid_reference(url: str) -> bool:
    try:
        parsed = urlparse(url)
    except ValueError:
        return False
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def load_dataset_table(stream: bytes | str | io.IOBase) -> tuple[list[DatasetTableRow], list[tuple[int, str]]]:
    """Parse a UTF-8 CSV reference table (RFC 4180).

    Returns (valid rows, row-level errors); raises TableError when the file
    is empty or the mandatory ``reference`` column is missing.  Columns other
    than reference/title/date/notes are folded into notes as key=value pairs.
    """
    if isinstance(stream, bytes):
        data: bytes | str = stream
    elif isinstance(stream, str):
        data = stream
    else:
        data = stream.read()
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TableError(f"table is not valid UTF-8: {exc}") from None
    else:
        text = data
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise TableError("empty table") from None
    columns = [c.strip().lower() for c in header]
    if "reference" not in columns:
        raise TableError("schema: reference column required")

    known = {"reference", "title", "date", "notes"}
    rows: list[DatasetTableRow] = []
    errors: list[tuple[int, str]] = []
    for index, record in enumerate(reader):
        values = dict(zip(columns, record))
        reference = (values.get("reference") or "").strip()
        if not reference:
            errors.append((index, "missing reference"))
            continue
        if not _valid_reference(reference):
            errors.append((index, f"invalid reference: {reference}"))
            continue
        extras = [
            f"{col}={values[col]}"
            for col in columns
            if col not in known and values.get(col)
        ]
        notes = values.get("notes") or None
        if extras:
            notes = "; ".join(([notes] if notes else []) + extras)
        rows.append(
            DatasetTableRow(
                reference=reference,
                title=values.get("title") or None,
                date=values.get("date") or None,
                notes=notes,
            )
        )
    if not rows and not errors:
        raise TableError("empty table")
    return rows, errors


def cache_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


class _TextExtractor(HTMLParser):
    """Forgiving HTML-to-text: skips script/style/noscript, keeps text nodes."""

    _SKIP = {"script", "style", "noscript"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth > 0:
            self._skip_depth -= 1

    def handle_data(self, data):
        if self._skip_depth == 0 and data:
            self.chunks.append(data)


def extract_text(body: bytes, content_type: str) -> str:
    """Reduce a response body to plain text; total, never raises."""
    text = body.decode("utf-8", errors="replace")
    if "html" in (content_type or "").lower():
        parser = _TextExtractor()
        parser.feed(text)
        parser.close()
        text = " ".join(parser.chunks)
    return " ".join(text.split())


def _read_cache(url: str, cache_dir: Path) -> tuple[bytes, str] | None:
    body_path = cache_dir / cache_key(url)
    meta_path = cache_dir / (cache_key(url) + ".meta")
    if not body_path.exists():
        return None
    content_type = "text/plain"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text("utf-8"))
        status = int(meta.get("status", 200))
        if not 200 <= status < 300:
            raise FetchError("http_status", f"cached status {status} for {url}")
        content_type = meta.get("content_type", content_type)
    return body_path.read_bytes(), content_type


def _write_cache(url: str, body: bytes, content_type: str, status: int, cache_dir: Path) -> None:
    cache_dir.mkdir(parents=True, exist_ok=True)
    (cache_dir / cache_key(url)).write_bytes(body)
    meta = {"url": url, "content_type": content_type, "status": status}
    (cache_dir / (cache_key(url) + ".meta")).write_text(json.dumps(meta), "utf-8")


def _fetch_online(url: str, policy: FetchPolicy) -> tuple[bytes, str]:
    last_error: FetchError | None = None
    for _ in range(policy.retries + 1):
        try:
            with requests.Session() as session:
                session.max_redirects = policy.max_redirects
                response = session.get(url, timeout=policy.timeout, stream=True)
                if not 200 <= response.status_code < 300:
                    raise FetchError("http_status", f"status {response.status_code} for {url}")
                body = b""
                for chunk in response.iter_content(chunk_size=65536):
                    body += chunk
                    if len(body) > policy.max_bytes:
                        raise FetchError("size_cap", f"size cap exceeded for {url}")
                content_type = response.headers.get("Content-Type", "text/plain")
                return body, content_type
        except requests.Timeout:
            last_error = FetchError("timeout", f"timeout fetching {url}")
        except requests.TooManyRedirects:
            raise FetchError("too_many_redirects", f"redirect limit exceeded for {url}") from None
        except FetchError as exc:
            if exc.code in ("http_status", "size_cap"):
                raise
            last_error = exc
        except requests.RequestException as exc:
            last_error = FetchError("network", f"network error fetching {url}: {exc}")
    assert last_error is not None
    raise last_error


def fetch_url(url: str, policy: FetchPolicy, doc_id: str | None = None) -> RawDocument:
    """Retrieve one page as a RawDocument, honoring cache and offline mode."""
    cache_dir = Path(policy.cache_dir) if policy.cache_dir else None
    body: bytes | None = None
    content_type = "text/plain"
    if cache_dir is not None:
        cached = _read_cache(url, cache_dir)
        if cached is not None:
            body, content_type = cached
    if body is None:
        if policy.offline_mode:
            raise FetchError("offline_miss", f"offline cache miss for {url}")
        body, content_type = _fetch_online(url, policy)
        if cache_dir is not None:
            _write_cache(url, body, content_type, 200, cache_dir)
    return RawDocument(
        doc_id=doc_id or cache_key(url)[:16],
        source=url,
        raw_text=extract_text(body, content_type),
        retrieved_at=datetime.now(timezone.utc).isoformat(),
    )


def ingest_dataset(
    name: str,
    table: list[DatasetTableRow],
    policy: FetchPolicy | None = None,
    prep: PrepConfig | None = None,
    dataset_id: str | None = None,
) -> Dataset:
    """Fetch, extract and preprocess every table row, then vectorize.

    Rows fetch concurrently but documents keep table order.  The dataset is
    ``ingested`` if at least one row succeeded, ``failed`` otherwise.
    """
    if not table:
        raise TableError("empty table")
    policy = policy or FetchPolicy()
    prep = prep or PrepConfig()
    dataset = Dataset(dataset_id=dataset_id or name, name=name, rows=list(table))

    def fetch_row(index_row: tuple[int, DatasetTableRow]):
        index, row = index_row
        try:
            return index, fetch_url(row.reference, policy, doc_id=f"doc-{index:05d}"), None
        except FetchError as exc:
            return index, None, f"{exc.code}: {exc}"

    workers = max(1, policy.parallelism)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(fetch_row, enumerate(table)))

    for index, raw, error in outcomes:
        if raw is None:
            dataset.fetch_failures.append((index, error))
            continue
        clean = preprocess_document(raw, prep)
        dataset.documents.append(clean)
        dataset.doc_sources[clean.doc_id] = table[index].reference

    if dataset.documents:
        dataset.dictionary = build_dictionary(dataset.documents)
        dataset.bows = [to_bow(doc, dataset.dictionary) for doc in dataset.documents]
        dataset.vectors = compute_tfidf(dataset.bows, dataset.dictionary)
        dataset.status = "ingested"
    else:
        dataset.status = "failed"
    dataset.prep_meta = {
        "stopword_list_id": prep.stopword_list_id,
        "stopword_list_sha256": stopword_list_hash(prep.stopword_list_id),
        "pos_filter_enabled": prep.pos_filter_enabled,
        "min_token_len": prep.min_token_len,
    }
    return dataset


def train_dataset(dataset: Dataset, config: LdaConfig, debug: bool = False) -> Dataset:
    """Train the dataset's topic model in place; requires an ingested corpus."""
    if dataset.status not in ("ingested", "trained"):
        raise ValueError(f"dataset not ready: status={dataset.status}")
    dataset.model = topics.train(dataset.bows, dataset.dictionary, config, debug=debug)
    dataset.status = "trained"
    return dataset
