import random
from pathlib import Path

import pytest

from pipeguard import ingest
from pipeguard.textprep import CleanDocument, PrepConfig
from pipeguard.corpus import build_dictionary, to_bow
from pipeguard.topics import LdaConfig
from pipeguard.ingest import FetchPolicy

FIXTURES = Path(__file__).parent / "fixtures"

CLUSTER_A = ["phishing", "malware", "breach", "exploit", "ransomware"]
CLUSTER_B = ["encryption", "certificate", "protocol", "handshake", "cipher"]


def make_two_cluster_docs(seed: int = 7, docs_per_cluster: int = 20, tokens_per_doc: int = 50):
    """Synthetic corpus with two disjoint 5-word vocabularies."""
    rng = random.Random(seed)
    docs = []
    for cluster, vocab in (("a", CLUSTER_A), ("b", CLUSTER_B)):
        for i in range(docs_per_cluster):
            tokens = tuple(rng.choice(vocab) for _ in range(tokens_per_doc))
            docs.append(
                CleanDocument(doc_id=f"{cluster}{i:02d}", summary=" ".join(tokens), tokens=tokens)
            )
    return docs


@pytest.fixture(scope="session")
def two_cluster_docs():
    return make_two_cluster_docs()


@pytest.fixture(scope="session")
def two_cluster_corpus(two_cluster_docs):
    dictionary = build_dictionary(two_cluster_docs)
    bows = [to_bow(doc, dictionary) for doc in two_cluster_docs]
    return dictionary, bows


@pytest.fixture(scope="session")
def offline_policy():
    return FetchPolicy(offline_mode=True, cache_dir=FIXTURES / "cache")


def _load_fixture_dataset(name: str, table: str, policy) -> ingest.Dataset:
    rows, _ = ingest.load_dataset_table((FIXTURES / "tables" / table).read_bytes())
    return ingest.ingest_dataset(name, rows, policy, PrepConfig(), dataset_id=name)


@pytest.fixture(scope="session")
def supply_chain_dataset(offline_policy):
    dataset = _load_fixture_dataset("supply-chain", "supply_chain.csv", offline_policy)
    return ingest.train_dataset(dataset, LdaConfig(seed=42))


@pytest.fixture(scope="session")
def web_attacks_dataset(offline_policy):
    dataset = _load_fixture_dataset("web-attacks", "web_attacks.csv", offline_policy)
    return ingest.train_dataset(dataset, LdaConfig(num_topics=4, seed=42))


@pytest.fixture(scope="session")
def release_notes_text():
    return (FIXTURES / "release_notes.txt").read_text("utf-8")
