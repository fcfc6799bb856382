import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipeguard.corpus import (
    BowVector,
    Dictionary,
    build_dictionary,
    compute_tfidf,
    tfidf_weights,
    to_bow,
)
from pipeguard.textprep import CleanDocument


def doc(doc_id, *tokens):
    return CleanDocument(doc_id=doc_id, summary=" ".join(tokens), tokens=tuple(tokens))


class TestBuildDictionary:
    def test_first_appearance_ids_and_doc_freq(self):
        d = build_dictionary([doc("1", "a", "b"), doc("2", "b", "c")])
        assert len(d) == 3
        assert d.token_to_id == {"a": 0, "b": 1, "c": 2}
        assert d.doc_freq == [1, 2, 1]
        assert d.num_docs == 2

    def test_empty(self):
        d = build_dictionary([])
        assert len(d) == 0
        assert d.num_docs == 0

    def test_per_document_dedup(self):
        d = build_dictionary([doc("1", "x", "x", "x")])
        assert len(d) == 1
        assert d.doc_freq == [1]

    def test_round_trip_bijection(self):
        d = build_dictionary([doc("1", "c", "a", "b", "a")])
        for token, term_id in d.token_to_id.items():
            assert d.id_to_token[term_id] == token
        assert sorted(d.token_to_id.values()) == list(range(len(d)))

    def test_rebuild_is_identical(self):
        docs = [doc("1", "a", "b"), doc("2", "b", "c", "d")]
        d1, d2 = build_dictionary(docs), build_dictionary(docs)
        assert d1.token_to_id == d2.token_to_id
        assert d1.doc_freq == d2.doc_freq
        assert d1.to_bytes() == d2.to_bytes()

    def test_min_df_prunes_rare_terms(self):
        docs = [doc("1", "a", "b"), doc("2", "b", "c"), doc("3", "b")]
        d = build_dictionary(docs, min_df=2)
        assert d.token_to_id == {"b": 0}
        assert d.doc_freq == [3]
        assert d.num_docs == 3

    def test_max_df_ratio_prunes_ubiquitous_terms(self):
        docs = [doc("1", "a", "b"), doc("2", "b", "c"), doc("3", "b", "a")]
        d = build_dictionary(docs, max_df_ratio=0.7)
        assert d.token_to_id == {"a": 0, "c": 1}  # "b" in 3/3 docs dropped

    def test_default_knobs_are_noop(self):
        docs = [doc("1", "a", "b"), doc("2", "b", "c")]
        assert build_dictionary(docs, 1, 1.0).to_bytes() == build_dictionary(docs).to_bytes()

    def test_serialization_round_trip(self):
        d = build_dictionary([doc("1", "alpha", "beta"), doc("2", "beta", "γamma")])
        restored = Dictionary.from_bytes(d.to_bytes())
        assert restored.token_to_id == d.token_to_id
        assert restored.id_to_token == d.id_to_token
        assert restored.doc_freq == d.doc_freq
        assert restored.num_docs == d.num_docs
        assert restored.content_hash() == d.content_hash()


class TestToBow:
    def test_counts(self):
        d = build_dictionary([doc("1", "a", "b")])
        bow = to_bow(doc("q", "b", "a", "b"), d)
        assert bow.entries == ((0, 1), (1, 2))
        assert bow.dropped == 0

    def test_empty(self):
        d = build_dictionary([doc("1", "a")])
        assert to_bow(doc("q"), d).entries == ()

    def test_oov_dropped_and_counted(self):
        d = build_dictionary([doc("1", "a")])
        bow = to_bow(doc("q", "z"), d)
        assert bow.entries == ()
        assert bow.dropped == 1

    def test_mass_conservation(self):
        d = build_dictionary([doc("1", "a", "b", "c")])
        query = doc("q", "a", "z", "b", "a", "y")
        bow = to_bow(query, d)
        assert bow.total() + bow.dropped == len(query.tokens)

    def test_entries_ascending(self):
        d = build_dictionary([doc("1", "c", "b", "a")])
        bow = to_bow(doc("q", "a", "c", "b"), d)
        ids = [t for t, _ in bow.entries]
        assert ids == sorted(ids)


class TestTfidf:
    def test_single_doc_weight(self):
        # one doc, term appears twice: weight = 2 * (ln(2/2) + 1) = 2.0
        d = build_dictionary([doc("1", "a", "a")])
        [vec] = compute_tfidf([to_bow(doc("1", "a", "a"), d)], d)
        assert vec.entries == ((0, 2.0),)
        assert vec.norm == 2.0

    def test_idf_term_in_all_docs(self):
        # term 0 in both of two docs: idf = ln(3/3) + 1 = 1.0 exactly
        d = build_dictionary([doc("1", "a"), doc("2", "a", "b")])
        assert d.idf(0) == 1.0

    def test_empty_bow(self):
        d = build_dictionary([doc("1", "a")])
        [vec] = compute_tfidf([BowVector("q", ())], d)
        assert vec.entries == ()
        assert vec.norm == 0.0

    def test_weights_positive_whenever_count_positive(self):
        docs = [doc("1", "a", "b", "b"), doc("2", "b", "c"), doc("3", "c", "c", "a")]
        d = build_dictionary(docs)
        for vec in compute_tfidf([to_bow(x, d) for x in docs], d):
            for _, weight in vec.entries:
                assert weight > 0.0

    def test_norm_matches_entries(self):
        docs = [doc("1", "a", "b", "b", "c"), doc("2", "b", "d")]
        d = build_dictionary(docs)
        for vec in compute_tfidf([to_bow(x, d) for x in docs], d):
            expected = math.sqrt(sum(w * w for _, w in vec.entries))
            assert vec.norm == pytest.approx(expected, rel=1e-12)


@given(
    st.lists(
        st.lists(st.sampled_from("abcdefgh"), min_size=0, max_size=12),
        min_size=0,
        max_size=8,
    )
)
@settings(max_examples=200, deadline=None)
def test_dictionary_and_bow_properties(token_lists):
    docs = [
        CleanDocument(doc_id=f"d{i}", summary=" ".join(ts), tokens=tuple(ts))
        for i, ts in enumerate(token_lists)
    ]
    d = build_dictionary(docs)
    assert d.num_docs == len(docs)
    assert sorted(d.token_to_id.values()) == list(range(len(d)))
    for term_id, freq in enumerate(d.doc_freq):
        assert 1 <= freq <= max(d.num_docs, 1)
    for document in docs:
        bow = to_bow(document, d)
        assert bow.dropped == 0
        assert bow.total() == len(document.tokens)
        vec = tfidf_weights(bow, d)
        assert all(w > 0 for _, w in vec.entries)
