"""Deterministic text cleaning, tokenization, stopword removal and lemmatization.

The pipeline is rule-based on purpose: no statistical models, no network,
no non-vendored word lists.  Running the same text through the same config
produces bit-identical output on every platform.
"""
from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

__all__ = [
    "RawDocument",
    "CleanDocument",
    "PrepConfig",
    "ConfigurationError",
    "clean_text",
    "tokenize",
    "remove_stopwords",
    "lemmatize",
    "preprocess_document",
    "stopword_list_hash",
]

_VOWELS = frozenset("aeiou")

# Suffixes where a plural "-es" attaches to the bare stem (box -> boxes).
_SIBILANT_ES = ("xes", "zes", "ches", "shes")


class ConfigurationError(ValueError):
    """Raised when a PrepConfig references resources that do not exist."""


@dataclass(frozen=True)
class RawDocument:
    """A source text before any processing.

    ``source`` is the provenance (URL or uploaded filename); ``retrieved_at``
    is a UTC ISO-8601 string for fetched pages and None for uploads.
    """

    doc_id: str
    source: str
    raw_text: str
    retrieved_at: str | None = None


@dataclass(frozen=True)
class CleanDocument:
    """A document after the full preprocessing pipeline.

    ``summary`` is the space-join of ``tokens``; both are reproducible
    bit-for-bit from the raw text and config.
    """

    doc_id: str
    summary: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class PrepConfig:
    stopword_list_id: str = "en"
    pos_filter_enabled: bool = False
    min_token_len: int = 2

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")


_STOPWORD_FILES = {"en": "stopwords_en.txt"}


def _read_data_text(filename: str) -> str:
    return resources.files("pipeguard.data").joinpath(filename).read_text("utf-8")


def _load_stopwords(list_id: str) -> frozenset[str]:
    try:
        filename = _STOPWORD_FILES[list_id]
    except KeyError:
        raise ConfigurationError(f"unknown stopword list: {list_id!r}") from None
    words = _read_data_text(filename).split("\n")
    return frozenset(w for w in words if w)


def _load_tsv(filename: str) -> dict[str, str]:
    table: dict[str, str] = {}
    for line in _read_data_text(filename).split("\n"):
        if not line:
            continue
        key, _, value = line.partition("\t")
        table[key] = value
    return table


# Loaded once at import; the files are small and immutable.
_STOPWORDS: dict[str, frozenset[str]] = {}
_LEMMA_EXCEPTIONS = _load_tsv("lemma_exceptions.tsv")
_POS_LEXICON = _load_tsv("pos_lexicon.tsv")


def _stopwords_for(config: PrepConfig) -> frozenset[str]:
    list_id = config.stopword_list_id
    if list_id not in _STOPWORDS:
        _STOPWORDS[list_id] = _load_stopwords(list_id)
    return _STOPWORDS[list_id]


def stopword_list_hash(list_id: str = "en") -> str:
    """SHA-256 of the vendored stopword file, recorded in artifact metadata."""
    try:
        filename = _STOPWORD_FILES[list_id]
    except KeyError:
        raise ConfigurationError(f"unknown stopword list: {list_id!r}") from None
    raw = resources.files("pipeguard.data").joinpath(filename).read_bytes()
    return hashlib.sha256(raw).hexdigest()


def clean_text(raw: str) -> str:
    """Lowercase and strip text down to ASCII letters separated by single spaces.

    NFC-normalizes first, then replaces every character that is not an ASCII
    letter (digits, punctuation, non-ASCII letters) with a space, collapses
    whitespace runs and trims.  Total: never raises.
    """
    text = unicodedata.normalize("NFC", raw).lower()
    out = []
    for ch in text:
        if "a" <= ch <= "z":
            out.append(ch)
        else:
            out.append(" ")
    return " ".join("".join(out).split())


def tokenize(cleaned: str, min_token_len: int = 2) -> list[str]:
    """Split cleaned text on spaces, dropping tokens shorter than the minimum."""
    return [t for t in cleaned.split(" ") if len(t) >= min_token_len] if cleaned else []


def remove_stopwords(tokens: list[str], config: PrepConfig) -> list[str]:
    """Drop tokens present in the configured stopword list, preserving order."""
    stop = _stopwords_for(config)
    return [t for t in tokens if t not in stop]


def _suffix_rules(token: str) -> str:
    n = len(token)
    if n <= 3:
        return token
    if token.endswith("ies") and n > 4:
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith(_SIBILANT_ES):
        return token[:-2]
    if token.endswith("oes") and n > 4:
        return token[:-2]
    if token.endswith("es"):
        return token[:-1]
    if token.endswith("s") and not token.endswith(("ss", "us", "is")):
        if token[-2] not in _VOWELS:
            return token[:-1]
    return token


def _lemma(token: str) -> str:
    exc = _LEMMA_EXCEPTIONS.get(token)
    if exc is not None:
        return exc
    stem = _suffix_rules(token)
    # A rule output can itself be an irregular plural ("mens" -> "men");
    # resolving it keeps the map idempotent.
    return _LEMMA_EXCEPTIONS.get(stem, stem)


def lemmatize(tokens: list[str], config: PrepConfig) -> list[str]:
    """Map tokens to lemmas; optionally keep only nouns and adjectives.

    Lemmas come from the exception lexicon first, then deterministic suffix
    rules.  The POS filter looks the lemma up in the vendored lexicon (raw
    token as fallback) and drops verbs and function words; words absent from
    the lexicon are retained, so unknown vocabulary is never lost.
    """
    out = []
    for token in tokens:
        lemma = _lemma(token)
        if config.pos_filter_enabled:
            pos = _POS_LEXICON.get(lemma) or _POS_LEXICON.get(token)
            if pos is not None and pos not in ("n", "adj"):
                continue
        out.append(lemma)
    return out


def preprocess_document(raw: RawDocument, config: PrepConfig | None = None) -> CleanDocument:
    """Run the full pipeline: clean, tokenize, drop stopwords, lemmatize.

    A final closure pass re-applies the length and stopword filters, since a
    lemma can be shorter than its surface form ("oxen" -> "ox") or collide
    with a stopword.  Output is therefore stable under re-processing.
    """
    config = config or PrepConfig()
    cleaned = clean_text(raw.raw_text)
    tokens = tokenize(cleaned, config.min_token_len)
    tokens = remove_stopwords(tokens, config)
    tokens = lemmatize(tokens, config)
    stop = _stopwords_for(config)
    tokens = [t for t in tokens if len(t) >= config.min_token_len and t not in stop]
    return CleanDocument(
        doc_id=raw.doc_id,
        summary=" ".join(tokens),
        tokens=tuple(tokens),
    )
