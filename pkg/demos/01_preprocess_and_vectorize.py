"""Walkthrough: raw incident text -> clean tokens -> TF-IDF vectors.

Run:  python demos/01_preprocess_and_vectorize.py
"""
from pipeguard import (
    PrepConfig,
    RawDocument,
    build_dictionary,
    compute_tfidf,
    preprocess_document,
    to_bow,
)

texts = [
    "Attackers EXPLOITED 2 servers during the breach!!",
    "The stolen certificates enabled a phishing campaign.",
    "Encryption failures exposed the customer databases.",
]

config = PrepConfig()
docs = [
    preprocess_document(RawDocument(doc_id=f"doc{i}", source="demo", raw_text=t), config)
    for i, t in enumerate(texts)
]
for doc in docs:
    print(f"{doc.doc_id}: {doc.summary!r}")

dictionary = build_dictionary(docs)
print(f"\nvocabulary ({len(dictionary)} terms):", dictionary.id_to_token)

bows = [to_bow(d, dictionary) for d in docs]
for doc, vec in zip(docs, compute_tfidf(bows, dictionary)):
    pretty = {dictionary.id_to_token[t]: round(w, 3) for t, w in vec.entries}
    print(f"{doc.doc_id}: norm={vec.norm:.3f} weights={pretty}")
