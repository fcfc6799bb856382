"""Command-line surface; the pipeline-embeddable form of the service.

Same code paths as the HTTP API, but compare runs synchronously and the
exit code carries the gate semantic: 0 clean, 1 operational error, 3 when
any match exceeds the highlight threshold (lets CI fail the build on
findings without conflating them with infrastructure errors).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import ingest, match, topics
from ..store import NotFoundError, Store
from ..textprep import PrepConfig, RawDocument, preprocess_document
from . import jobs, records
from .config import GatewayConfig, resolve_config

__all__ = ["main"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 3

CLI_USER = "cli"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeguard",
        description="Compare CI/CD text artifacts against security-incident corpora.",
    )
    parser.add_argument("--data-dir", help="data directory (or PIPEGUARD_DATA_DIR)")
    parser.add_argument("--config", help="JSON config file (or PIPEGUARD_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a CSV reference table as a dataset")
    p.add_argument("csv", help="path to the reference table")
    p.add_argument("--name", required=True)
    p.add_argument("--offline", action="store_true", help="serve fetches from cache only")
    p.add_argument("--cache-dir", help="fixture/cache directory")

    p = sub.add_parser("train", help="train the topic model of a dataset")
    p.add_argument("dataset", help="dataset name or id")
    p.add_argument("--topics", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("compare", help="rank dataset documents against a file")
    p.add_argument("file", help="text file to analyze")
    p.add_argument("--datasets", required=True, help="comma-separated dataset names or ids")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.60, help="highlight threshold")
    p.add_argument("--gate-threshold", type=float, default=0.20)
    p.add_argument("--no-gate", action="store_true")

    p = sub.add_parser("report", help="print the report of a finished job")
    p.add_argument("job_id")

    p = sub.add_parser("topics", help="print the top words of each topic")
    p.add_argument("dataset", help="dataset name or id")
    p.add_argument("--words", type=int, default=10)

    p = sub.add_parser("serve", help="run the HTTP API server")
    p.add_argument("--addr", help="host:port to listen on")
    p.add_argument("--workers", type=int, default=None, help="background job workers")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--cache-dir")
    p.add_argument("--console", help="directory with the built console to serve at /")
    return parser


def _resolve_dataset_id(store: Store, name_or_id: str) -> str:
    keys = store.list_keys("datasets")
    if name_or_id in keys:
        return name_or_id
    for key in keys:
        if store.get("datasets", key)["name"] == name_or_id:
            return key
    raise NotFoundError(f"unknown dataset: {name_or_id}")


def _cmd_ingest(store: Store, config: GatewayConfig, args) -> int:
    table_path = Path(args.csv)
    rows, row_errors = ingest.load_dataset_table(table_path.read_bytes())
    policy = ingest.FetchPolicy(
        timeout=config.fetch_timeout,
        offline_mode=args.offline or config.offline_mode,
        cache_dir=args.cache_dir or config.resolved_cache_dir(),
    )
    dataset_id = store.next_id("dataset")
    dataset = ingest.ingest_dataset(args.name, rows, policy, PrepConfig(), dataset_id=dataset_id)
    records.save_dataset(store, dataset, owner=CLI_USER)
    print(
        json.dumps(
            {
                "dataset_id": dataset_id,
                "name": args.name,
                "status": dataset.status,
                "documents": len(dataset.documents),
                "row_errors": row_errors,
                "fetch_failures": dataset.fetch_failures,
            },
            ensure_ascii=False,
        )
    )
    return EXIT_OK if dataset.status == "ingested" else EXIT_ERROR


def _cmd_train(store: Store, args) -> int:
    dataset_id = _resolve_dataset_id(store, args.dataset)
    job = jobs.submit_train_job(store, CLI_USER, dataset_id, args.topics, args.seed)
    job = jobs.run_job(store, store.claim_next_job(jobs.DEFAULT_LEASE_TTL))
    if job["state"] != "done":
        print(f"error: {job['error']}", file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps({"job_id": job["job_id"], **job["payload"]["result"]}, ensure_ascii=False))
    return EXIT_OK


def _cmd_compare(store: Store, args) -> int:
    path = Path(args.file)
    if not path.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_ERROR
    raw = path.read_bytes()
    doc = preprocess_document(
        RawDocument(doc_id=path.name, source=path.name, raw_text=raw.decode("utf-8", "replace"))
    )
    file_id = store.next_id("file")
    records.save_file(store, file_id, CLI_USER, path.name, raw, doc)

    dataset_ids = [_resolve_dataset_id(store, n.strip()) for n in args.datasets.split(",") if n.strip()]
    if not dataset_ids:
        print("error: no datasets given", file=sys.stderr)
        return EXIT_ERROR
    params = match.CompareParams(
        k=args.k,
        highlight_threshold=args.threshold,
        relevance_gate_threshold=args.gate_threshold,
        gate_enabled=not args.no_gate,
    )
    job = jobs.submit_compare_job(store, CLI_USER, file_id, dataset_ids, params)
    job = jobs.run_job(store, store.claim_next_job(jobs.DEFAULT_LEASE_TTL))
    if job["state"] != "done":
        print(f"error: {job['error']}", file=sys.stderr)
        return EXIT_ERROR
    report = job["report"]
    sys.stdout.write(match.report_to_json(report))
    return EXIT_FINDINGS if report["highlights"] else EXIT_OK


def _cmd_report(store: Store, args) -> int:
    try:
        job = store.get("jobs", args.job_id)
    except NotFoundError:
        print(f"error: unknown job: {args.job_id}", file=sys.stderr)
        return EXIT_ERROR
    if job["state"] != "done" or not job.get("report"):
        print(f"error: job {args.job_id} state={job['state']}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(match.report_to_json(job["report"]))
    return EXIT_OK


def _cmd_topics(store: Store, args) -> int:
    dataset_id = _resolve_dataset_id(store, args.dataset)
    record = store.get("datasets", dataset_id)
    if record["status"] != "trained":
        print(f"error: dataset not trained: {args.dataset}", file=sys.stderr)
        return EXIT_ERROR
    model, dictionary = topics.load_model(store.get_latest_model(dataset_id).container)
    out = {
        "dataset_id": dataset_id,
        "num_topics": model.num_topics,
        "topics": [
            {"topic": k, "words": topics.top_words(model, k, args.words, dictionary)}
            for k in range(model.num_topics)
        ],
    }
    print(json.dumps(out, ensure_ascii=False, indent=2))
    return EXIT_OK


def _cmd_serve(store: Store, config: GatewayConfig, args) -> int:
    import uvicorn

    from .api import create_app

    if args.offline:
        config.offline_mode = True
    if args.cache_dir:
        config.cache_dir = args.cache_dir
    if args.workers is not None:
        config.worker_count = args.workers
    if args.console:
        config.console_dir = args.console
    addr = args.addr or config.listen_addr
    host, _, port = addr.partition(":")
    app = create_app(store, config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8765), log_level="warning")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    config = resolve_config(flags={"data_dir": args.data_dir, "config": args.config})
    store = Store(config.data_dir)
    try:
        if args.command == "ingest":
            return _cmd_ingest(store, config, args)
        if args.command == "train":
            return _cmd_train(store, args)
        if args.command == "compare":
            return _cmd_compare(store, args)
        if args.command == "report":
            return _cmd_report(store, args)
        if args.command == "topics":
            return _cmd_topics(store, args)
        if args.command == "serve":
            return _cmd_serve(store, config, args)
        raise AssertionError(f"unhandled command {args.command}")
    except (NotFoundError, ingest.TableError, ingest.FetchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        store.close()


if __name__ == "__main__":
    sys.exit(main())
