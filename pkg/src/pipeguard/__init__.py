"""pipeguard: topic-model matching of CI/CD text artifacts against incident corpora.

The core flow mirrors the deployment gate it serves: ingest a reference
table of security-incident pages, train a topic model per dataset, then
compare a pipeline artifact (release notes, logs) against every dataset —
a topic-space relevance gate followed by TF-IDF cosine ranking of the
top-10 closest documents.
"""

from .textprep import (
    CleanDocument,
    PrepConfig,
    RawDocument,
    clean_text,
    lemmatize,
    preprocess_document,
    remove_stopwords,
    tokenize,
)
from .corpus import (
    BowVector,
    Dictionary,
    TfidfVector,
    build_dictionary,
    compute_tfidf,
    to_bow,
)
from .topics import (
    LdaConfig,
    LdaModel,
    infer,
    load_model,
    perplexity,
    save_model,
    top_words,
    train,
)
from .match import (
    CompareParams,
    ComparisonReport,
    MatchResult,
    compare,
    cosine,
    dataset_relevance,
    top_k,
)
from .ingest import (
    Dataset,
    DatasetTableRow,
    FetchPolicy,
    extract_text,
    fetch_url,
    ingest_dataset,
    load_dataset_table,
    train_dataset,
)
from .store import Store, hash_password, verify_password

__version__ = "0.1.0"
