"""Latent topic training and inference via collapsed Gibbs sampling.

Training resamples per-token topic assignments from the conditional counts,
then estimates the topic-word table (phi) and per-document topic mixtures
(theta) from count averages taken every ``thin``-th sweep after burn-in,
smoothed by the symmetric Dirichlet priors.  Given the same corpus, config
and seed the resulting model is bit-identical on every run and platform.

Models serialize to a self-contained ``.ldam`` container that embeds the
dictionary, so a stored model can be reloaded and queried without redoing
any training.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import _gibbs
from .corpus import BowVector, Dictionary
from .rng import derive_doc_seed, seed_state

__all__ = [
    "LdaConfig",
    "LdaModel",
    "CorpusError",
    "ModelIOError",
    "ModelMismatchError",
    "train",
    "infer",
    "top_words",
    "perplexity",
    "save_model",
    "load_model",
]

FORMAT_VERSION = 1
_MAGIC = b"LDAM"


class CorpusError(ValueError):
    """The input corpus cannot be trained on."""


class ModelIOError(ValueError):
    """A model container is corrupt or has an unsupported version."""


class ModelMismatchError(ValueError):
    """A query vector is not indexed against the model's dictionary."""


@dataclass
class LdaConfig:
    num_topics: int = 10
    alpha: float | None = None  # resolved to 50/K when unset
    beta: float = 0.01
    train_iters: int = 1000
    infer_iters: int = 200
    burn_in: int = 200
    seed: int = 0
    thin: int = 10

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.alpha is None:
            self.alpha = 50.0 / self.num_topics
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.train_iters < 1:
            raise ValueError("train_iters must be >= 1")
        if not 0 <= self.burn_in < self.train_iters:
            raise ValueError("burn_in must satisfy 0 <= burn_in < train_iters")
        if self.infer_iters < 1:
            raise ValueError("infer_iters must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        self.seed = self.seed & ((1 << 64) - 1)

    def pack(self) -> bytes:
        return struct.pack(
            "<IddIIIQI",
            self.num_topics,
            self.alpha,
            self.beta,
            self.train_iters,
            self.infer_iters,
            self.burn_in,
            self.seed,
            self.thin,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "LdaConfig":
        k, alpha, beta, train_iters, infer_iters, burn_in, seed, thin = struct.unpack(
            "<IddIIIQI", data
        )
        return cls(
            num_topics=k,
            alpha=alpha,
            beta=beta,
            train_iters=train_iters,
            infer_iters=infer_iters,
            burn_in=burn_in,
            seed=seed,
            thin=thin,
        )


@dataclass
class LdaModel:
    config: LdaConfig
    dictionary_hash: str
    phi: np.ndarray  # (K, V) float64, rows sum to 1
    training_doc_topics: np.ndarray  # (D, K) float64, rows sum to 1
    trained_at: str | None = None
    format_version: int = FORMAT_VERSION

    @property
    def num_topics(self) -> int:
        return self.phi.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.phi.shape[1]


def _token_arrays(bows: list[BowVector], vocab_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expand sparse counts into flat per-token arrays, doc by doc,
    ascending term id within each doc.  This layout is the canonical
    sampling order."""
    doc_parts = []
    word_parts = []
    n_d = np.zeros(len(bows), dtype=np.int64)
    for d, bow in enumerate(bows):
        if not bow.entries:
            continue
        terms = np.array([t for t, _ in bow.entries], dtype=np.int32)
        counts = np.array([c for _, c in bow.entries], dtype=np.int64)
        if int(terms.max()) >= vocab_size:
            raise ModelMismatchError("model/dictionary mismatch")
        words = np.repeat(terms, counts)
        doc_parts.append(np.full(len(words), d, dtype=np.int32))
        word_parts.append(words)
        n_d[d] = int(counts.sum())
    if not doc_parts:
        return (
            np.empty(0, dtype=np.int32),
            np.empty(0, dtype=np.int32),
            n_d,
        )
    return np.concatenate(doc_parts), np.concatenate(word_parts), n_d


def _check_conservation(n_dk, n_kw, n_k, n_d) -> None:
    if not np.array_equal(n_dk.sum(axis=1), n_d):
        raise AssertionError("per-document topic counts do not sum to doc length")
    if not np.array_equal(n_kw.sum(axis=1), n_k):
        raise AssertionError("per-topic word counts do not sum to topic totals")


def train(
    bows: list[BowVector],
    dictionary: Dictionary,
    config: LdaConfig,
    debug: bool = False,
) -> LdaModel:
    """Train a topic model with collapsed Gibbs sampling.

    ``debug`` enables per-sweep count-conservation assertions.
    """
    if not bows:
        raise CorpusError("empty corpus")
    vocab_size = len(dictionary)
    doc_ids, word_ids, n_d = _token_arrays(bows, vocab_size)
    if len(word_ids) == 0:
        raise CorpusError("no observable tokens")

    k_topics = config.num_topics
    alpha = float(config.alpha)
    beta = float(config.beta)
    num_docs = len(bows)

    z = np.zeros(len(word_ids), dtype=np.int32)
    n_dk = np.zeros((num_docs, k_topics), dtype=np.int64)
    n_kw = np.zeros((k_topics, vocab_size), dtype=np.int64)
    n_k = np.zeros(k_topics, dtype=np.int64)
    state = seed_state(config.seed)

    _gibbs.init_assignments(doc_ids, word_ids, z, n_dk, n_kw, n_k, state)
    if debug:
        _check_conservation(n_dk, n_kw, n_k, n_d)

    sum_dk = np.zeros_like(n_dk)
    sum_kw = np.zeros_like(n_kw)
    samples = 0
    for sweep in range(1, config.train_iters + 1):
        _gibbs.gibbs_sweep(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, beta, state)
        if debug:
            _check_conservation(n_dk, n_kw, n_k, n_d)
        if sweep > config.burn_in and (sweep - config.burn_in) % config.thin == 0:
            sum_dk += n_dk
            sum_kw += n_kw
            samples += 1
    if samples == 0:
        # Degenerate schedule (thin longer than the post-burn-in window):
        # fall back to the final sweep as a single sample.
        sum_dk = n_dk.copy()
        sum_kw = n_kw.copy()
        samples = 1

    sum_k = sum_kw.sum(axis=1)
    phi = (sum_kw + samples * beta) / (sum_k[:, None] + samples * vocab_size * beta)
    theta = (sum_dk + samples * alpha) / (
        samples * n_d[:, None] + samples * k_topics * alpha
    )

    return LdaModel(
        config=config,
        dictionary_hash=dictionary.content_hash(),
        phi=phi,
        training_doc_topics=theta,
        trained_at=datetime.now(timezone.utc).isoformat(),
    )


def infer(
    model: LdaModel,
    bow: BowVector,
    seed: int | None = None,
    dictionary: Dictionary | None = None,
) -> np.ndarray:
    """Fold a query document into a trained model, returning its topic mixture.

    The topic-word table stays fixed; only the query's own assignments are
    resampled.  The stream seed is derived from (seed, doc_id) so distinct
    documents draw independently.  An empty query yields the uniform mixture.
    """
    if dictionary is not None and dictionary.content_hash() != model.dictionary_hash:
        raise ModelMismatchError("model/dictionary mismatch")
    k_topics = model.num_topics
    if not bow.entries:
        return np.full(k_topics, 1.0 / k_topics)

    config = model.config
    if seed is None:
        seed = config.seed
    _, word_ids, n_d = _token_arrays([bow], model.vocab_size)
    n_q = int(n_d[0])
    alpha = float(config.alpha)

    z = np.zeros(len(word_ids), dtype=np.int32)
    n_qk = np.zeros(k_topics, dtype=np.int64)
    state = seed_state(derive_doc_seed(seed, bow.doc_id))

    _gibbs.infer_init(word_ids, z, n_qk, state)
    burn = config.infer_iters // 2
    sum_qk = np.zeros(k_topics, dtype=np.int64)
    samples = 0
    for sweep in range(1, config.infer_iters + 1):
        _gibbs.infer_sweep(word_ids, z, n_qk, model.phi, alpha, state)
        if sweep > burn and (sweep - burn) % config.thin == 0:
            sum_qk += n_qk
            samples += 1
    if samples == 0:
        sum_qk = n_qk.copy()
        samples = 1
    return (sum_qk + samples * alpha) / (samples * n_q + samples * k_topics * alpha)


def top_words(model: LdaModel, topic: int, n: int, dictionary: Dictionary) -> list[tuple[str, float]]:
    """The n most probable words of one topic, ties broken by ascending id."""
    if not 0 <= topic < model.num_topics:
        raise ValueError(f"topic index out of range: {topic}")
    if n <= 0:
        return []
    row = model.phi[topic]
    order = sorted(range(len(row)), key=lambda t: (-row[t], t))[:n]
    return [(dictionary.id_to_token[t], float(row[t])) for t in order]


def perplexity(model: LdaModel, bows: list[BowVector], seed: int | None = None) -> float:
    """exp of the negative mean per-token log likelihood; lower fits better."""
    log_sum = 0.0
    total = 0
    for bow in bows:
        if not bow.entries:
            continue
        theta = infer(model, bow, seed=seed)
        for term_id, count in bow.entries:
            p = float(np.dot(theta, model.phi[:, term_id]))
            log_sum += count * np.log(p)
            total += count
    if total == 0:
        raise CorpusError("no observable tokens")
    return float(np.exp(-log_sum / total))


def _block(data: bytes) -> bytes:
    return struct.pack("<Q", len(data)) + data


def _read_block(data: bytes, offset: int) -> tuple[bytes, int]:
    if offset + 8 > len(data):
        raise ModelIOError("corrupt container")
    (length,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    if offset + length > len(data):
        raise ModelIOError("corrupt container")
    return data[offset : offset + length], offset + length


def save_model(model: LdaModel, dictionary: Dictionary) -> bytes:
    """Serialize a model and its dictionary into the .ldam container.

    Layout: magic, u32 version, sha256(payload), then length-prefixed
    blocks: config, dictionary, phi, theta.  Matrices are little-endian
    float64 row-major, so the bytes are identical across platforms.
    """
    phi = np.ascontiguousarray(model.phi, dtype="<f8")
    theta = np.ascontiguousarray(model.training_doc_topics, dtype="<f8")
    phi_block = struct.pack("<II", phi.shape[0], phi.shape[1]) + phi.tobytes()
    theta_block = struct.pack("<II", theta.shape[0], theta.shape[1]) + theta.tobytes()
    payload = (
        _block(model.config.pack())
        + _block(dictionary.to_bytes())
        + _block(phi_block)
        + _block(theta_block)
    )
    digest = hashlib.sha256(payload).digest()
    return _MAGIC + struct.pack("<I", model.format_version) + digest + payload


def load_model(data: bytes) -> tuple[LdaModel, Dictionary]:
    """Parse and validate a .ldam container produced by save_model."""
    if len(data) < 40 or data[:4] != _MAGIC:
        raise ModelIOError("corrupt container")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise ModelIOError(f"unsupported version: {version}")
    digest = data[8:40]
    payload = data[40:]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelIOError("corrupt container (checksum mismatch)")

    offset = 0
    config_raw, offset = _read_block(payload, offset)
    dict_raw, offset = _read_block(payload, offset)
    phi_raw, offset = _read_block(payload, offset)
    theta_raw, offset = _read_block(payload, offset)
    try:
        config = LdaConfig.unpack(config_raw)
        dictionary = Dictionary.from_bytes(dict_raw)
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise ModelIOError("corrupt container") from exc

    def _matrix(raw: bytes) -> np.ndarray:
        rows, cols = struct.unpack_from("<II", raw, 0)
        body = raw[8:]
        if len(body) != rows * cols * 8:
            raise ModelIOError("corrupt container")
        return np.frombuffer(body, dtype="<f8").reshape(rows, cols).copy()

    phi = _matrix(phi_raw)
    theta = _matrix(theta_raw)
    for name, matrix in (("phi", phi), ("theta", theta)):
        if matrix.size and (
            not np.all(matrix > 0)
            or not np.allclose(matrix.sum(axis=1), 1.0, atol=1e-9)
        ):
            raise ModelIOError(f"invariant violation: {name} rows must be positive and sum to 1")
    model = LdaModel(
        config=config,
        dictionary_hash=dictionary.content_hash(),
        phi=phi,
        training_doc_topics=theta,
        trained_at=None,
    )
    return model, dictionary
