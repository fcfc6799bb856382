"""Walkthrough: the full gate — ingest fixture datasets, train, compare.

Uses the offline fixture corpus committed under tests/fixtures: a
supply-chain incident dataset containing a near-duplicate of the query
release notes, and a web-attacks dataset the relevance gate should skip.

Run:  python demos/03_offline_ingest_and_compare.py
"""
from pathlib import Path

from pipeguard import CompareParams, FetchPolicy, PrepConfig, RawDocument
from pipeguard import compare, ingest_dataset, load_dataset_table, preprocess_document, train_dataset
from pipeguard.topics import LdaConfig
from pipeguard.match import report_to_dict, report_to_json

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
policy = FetchPolicy(offline_mode=True, cache_dir=FIXTURES / "cache")


def build(name, table, **lda):
    rows, row_errors = load_dataset_table((FIXTURES / "tables" / table).read_bytes())
    dataset = ingest_dataset(name, rows, policy, PrepConfig(), dataset_id=name)
    print(f"{name}: {dataset.status}, {len(dataset.documents)} docs, "
          f"{len(dataset.fetch_failures)} fetch failures, V={len(dataset.dictionary)}")
    return train_dataset(dataset, LdaConfig(seed=42, **lda))


supply_chain = build("supply-chain", "supply_chain.csv")
web_attacks = build("web-attacks", "web_attacks.csv", num_topics=4)

query_text = (FIXTURES / "release_notes.txt").read_text("utf-8")
query = preprocess_document(
    RawDocument("release_notes.txt", "release_notes.txt", query_text), PrepConfig()
)

report = compare(query, [supply_chain, web_attacks], CompareParams(),
                 job_id="demo", file_ref="release_notes.txt")
print()
print(report_to_json(report_to_dict(report)))
