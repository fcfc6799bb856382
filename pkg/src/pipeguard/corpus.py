"""Vocabulary dictionary, sparse bag-of-words vectors and TF-IDF weighting.

Term ids are assigned in order of first appearance, so building a dictionary
from the same documents in the same order is always bit-identical.  Document
vectors are sparse (term_id, value) lists sorted by term_id.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

from .textprep import CleanDocument

__all__ = [
    "Dictionary",
    "BowVector",
    "TfidfVector",
    "build_dictionary",
    "to_bow",
    "tfidf_weights",
    "compute_tfidf",
]


@dataclass
class Dictionary:
    """Token <-> dense integer id mapping with document frequencies."""

    token_to_id: dict[str, int] = field(default_factory=dict)
    id_to_token: list[str] = field(default_factory=list)
    doc_freq: list[int] = field(default_factory=list)
    num_docs: int = 0

    def __len__(self) -> int:
        return len(self.id_to_token)

    def idf(self, term_id: int) -> float:
        """Smoothed inverse document frequency, always > 0."""
        return math.log((1 + self.num_docs) / (1 + self.doc_freq[term_id])) + 1.0

    def to_bytes(self) -> bytes:
        """Serialize: num_docs, V, length-prefixed UTF-8 tokens, doc_freq array."""
        parts = [struct.pack("<II", self.num_docs, len(self.id_to_token))]
        for token in self.id_to_token:
            raw = token.encode("utf-8")
            parts.append(struct.pack("<I", len(raw)))
            parts.append(raw)
        parts.append(struct.pack(f"<{len(self.doc_freq)}I", *self.doc_freq))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Dictionary":
        num_docs, size = struct.unpack_from("<II", data, 0)
        offset = 8
        tokens: list[str] = []
        for _ in range(size):
            (length,) = struct.unpack_from("<I", data, offset)
            offset += 4
            tokens.append(data[offset : offset + length].decode("utf-8"))
            offset += length
        freqs = list(struct.unpack_from(f"<{size}I", data, offset))
        return cls(
            token_to_id={t: i for i, t in enumerate(tokens)},
            id_to_token=tokens,
            doc_freq=freqs,
            num_docs=num_docs,
        )

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


@dataclass(frozen=True)
class BowVector:
    """Per-document term counts, entries strictly ascending by term_id."""

    doc_id: str
    entries: tuple[tuple[int, int], ...]
    dropped: int = 0  # out-of-vocabulary token count

    def total(self) -> int:
        return sum(count for _, count in self.entries)


@dataclass(frozen=True)
class TfidfVector:
    """Per-document TF-IDF weights plus the precomputed L2 norm."""

    doc_id: str
    entries: tuple[tuple[int, float], ...]
    norm: float


def build_dictionary(
    docs: list[CleanDocument],
    min_df: int = 1,
    max_df_ratio: float = 1.0,
) -> Dictionary:
    """Assign dense ids by first appearance and count document frequencies.

    The optional pruning knobs drop terms seen in fewer than ``min_df``
    documents or in more than ``max_df_ratio`` of them; the defaults keep
    everything.  Surviving terms are re-indexed densely in their original
    first-appearance order.
    """
    d = Dictionary()
    for doc in docs:
        seen: set[int] = set()
        for token in doc.tokens:
            term_id = d.token_to_id.get(token)
            if term_id is None:
                term_id = len(d.id_to_token)
                d.token_to_id[token] = term_id
                d.id_to_token.append(token)
                d.doc_freq.append(0)
            if term_id not in seen:
                d.doc_freq[term_id] += 1
                seen.add(term_id)
        d.num_docs += 1
    if min_df <= 1 and max_df_ratio >= 1.0:
        return d
    df_cap = max_df_ratio * d.num_docs
    pruned = Dictionary(num_docs=d.num_docs)
    for term_id, token in enumerate(d.id_to_token):
        freq = d.doc_freq[term_id]
        if freq < min_df or freq > df_cap:
            continue
        pruned.token_to_id[token] = len(pruned.id_to_token)
        pruned.id_to_token.append(token)
        pruned.doc_freq.append(freq)
    return pruned


def to_bow(doc: CleanDocument, dictionary: Dictionary) -> BowVector:
    """Count in-vocabulary tokens; out-of-vocabulary tokens are dropped."""
    counts: dict[int, int] = {}
    dropped = 0
    for token in doc.tokens:
        term_id = dictionary.token_to_id.get(token)
        if term_id is None:
            dropped += 1
        else:
            counts[term_id] = counts.get(term_id, 0) + 1
    entries = tuple(sorted(counts.items()))
    return BowVector(doc_id=doc.doc_id, entries=entries, dropped=dropped)


def tfidf_weights(bow: BowVector, dictionary: Dictionary) -> TfidfVector:
    """Weight one bag-of-words vector: raw count times smoothed idf.

    The norm is accumulated in ascending term order so equal inputs always
    produce the same bits.
    """
    entries = []
    sq = 0.0
    for term_id, count in bow.entries:
        w = count * dictionary.idf(term_id)
        entries.append((term_id, w))
        sq += w * w
    return TfidfVector(doc_id=bow.doc_id, entries=tuple(entries), norm=math.sqrt(sq))


def compute_tfidf(bows: list[BowVector], dictionary: Dictionary) -> list[TfidfVector]:
    return [tfidf_weights(bow, dictionary) for bow in bows]
