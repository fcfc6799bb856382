"""Numba kernels for the collapsed Gibbs sampler.

The xoshiro256** generator is inlined here because the sampler consumes one
uniform draw per token per sweep and must stay bit-reproducible: fixed
iteration order, fixed summation order, strict IEEE arithmetic (no fastmath).
Kernels mutate their count arrays in place; the Python driver in ``topics``
owns burn-in, thinning and bookkeeping checks between sweeps.
"""
from __future__ import annotations

import numba
import numpy as np

_U64 = np.uint64
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


@numba.njit(cache=True)
def _next_u64(state):
    s1 = state[1]
    x = s1 * _U64(5)
    result = ((x << _U64(7)) | (x >> _U64(57))) * _U64(9)
    t = s1 << _U64(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    s3 = state[3]
    state[3] = (s3 << _U64(45)) | (s3 >> _U64(19))
    return result


@numba.njit(cache=True)
def _next_double(state):
    return np.float64(_next_u64(state) >> _U64(11)) * _INV_2_53


@numba.njit(cache=True)
def init_assignments(doc_ids, word_ids, z, n_dk, n_kw, n_k, state):
    """Assign each token a uniform topic and build the count tables."""
    k_topics = n_dk.shape[1]
    for i in range(doc_ids.shape[0]):
        k = int(_next_double(state) * k_topics)
        if k >= k_topics:
            k = k_topics - 1
        z[i] = k
        n_dk[doc_ids[i], k] += 1
        n_kw[k, word_ids[i]] += 1
        n_k[k] += 1


@numba.njit(cache=True)
def gibbs_sweep(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, beta, state):
    """One full sweep: resample the topic of every token in order."""
    k_topics = n_kw.shape[0]
    vbeta = n_kw.shape[1] * beta
    cum = np.empty(k_topics, np.float64)
    for i in range(doc_ids.shape[0]):
        d = doc_ids[i]
        w = word_ids[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for kk in range(k_topics):
            total += (n_kw[kk, w] + beta) / (n_k[kk] + vbeta) * (n_dk[d, kk] + alpha)
            cum[kk] = total
        u = _next_double(state) * total
        k = 0
        while k < k_topics - 1 and cum[k] <= u:
            k += 1
        z[i] = k
        n_dk[d, k] += 1
        n_kw[k, w] += 1
        n_k[k] += 1


@numba.njit(cache=True)
def infer_init(word_ids, z, n_qk, state):
    k_topics = n_qk.shape[0]
    for i in range(word_ids.shape[0]):
        k = int(_next_double(state) * k_topics)
        if k >= k_topics:
            k = k_topics - 1
        z[i] = k
        n_qk[k] += 1


@numba.njit(cache=True)
def infer_sweep(word_ids, z, n_qk, phi, alpha, state):
    """Fold-in sweep over one query document with the topic-word table fixed."""
    k_topics = phi.shape[0]
    cum = np.empty(k_topics, np.float64)
    for i in range(word_ids.shape[0]):
        w = word_ids[i]
        k = z[i]
        n_qk[k] -= 1
        total = 0.0
        for kk in range(k_topics):
            total += phi[kk, w] * (n_qk[kk] + alpha)
            cum[kk] = total
        u = _next_double(state) * total
        k = 0
        while k < k_topics - 1 and cum[k] <= u:
            k += 1
        z[i] = k
        n_qk[k] += 1
