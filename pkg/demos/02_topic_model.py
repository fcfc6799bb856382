"""Walkthrough: train a topic model on a two-theme corpus and inspect it.

The corpus mixes documents about phishing-style attacks with documents
about transport encryption.  Two topics recover the two themes; a fresh
query folds into the right one.  Everything is seeded, so this script
prints the same numbers every run.

Run:  python demos/02_topic_model.py
"""
import random

from pipeguard import (
    CleanDocument,
    LdaConfig,
    build_dictionary,
    infer,
    load_model,
    perplexity,
    save_model,
    to_bow,
    top_words,
    train,
)

ATTACK = ["phishing", "malware", "breach", "exploit", "ransomware"]
CRYPTO = ["encryption", "certificate", "protocol", "handshake", "cipher"]

rng = random.Random(7)
docs = []
for name, vocab in (("attack", ATTACK), ("crypto", CRYPTO)):
    for i in range(20):
        tokens = tuple(rng.choice(vocab) for _ in range(50))
        docs.append(CleanDocument(f"{name}{i:02d}", " ".join(tokens), tokens))

dictionary = build_dictionary(docs)
bows = [to_bow(d, dictionary) for d in docs]
model = train(bows, dictionary, LdaConfig(num_topics=2, seed=42))

for k in range(model.num_topics):
    words = ", ".join(f"{w} {p:.2f}" for w, p in top_words(model, k, 5, dictionary))
    print(f"topic {k}: {words}")

query = CleanDocument("query", "", tuple(ATTACK * 30))
theta = infer(model, to_bow(query, dictionary), seed=1)
print("\nquery about attacks -> topic mixture:", [round(float(x), 3) for x in theta])

print(f"perplexity of the trained model: {perplexity(model, bows):.2f}")

blob = save_model(model, dictionary)
reloaded, _ = load_model(blob)
print(f"serialized container: {len(blob)} bytes; round-trip identical:",
      reloaded.phi.tobytes() == model.phi.tobytes())
