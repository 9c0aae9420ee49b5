"""PLSA topic training and the words each topic concentrates on.

The corpus mixes two themes (tax office, library); with K=2 the EM run
pulls them apart.  The log-likelihood trace never decreases.
"""

from faqfuse import PlsaConfig, top_words, train
from faqfuse.corpus import build_corpus

records = []
tax = ["tax", "payment", "office", "deadline", "invoice"]
lib = ["library", "book", "loan", "card", "branch"]
for i in range(10):
    records.append((f"t{i}", f"{tax[i % 5]} {tax[(i + 1) % 5]} question",
                    f"{tax[(i + 2) % 5]} {tax[(i + 3) % 5]}"))
    records.append((f"l{i}", f"{lib[i % 5]} {lib[(i + 1) % 5]} question",
                    f"{lib[(i + 2) % 5]} {lib[(i + 3) % 5]}"))
corpus = build_corpus(records, tokenizer_mode="unicode-word")

model = train(corpus, PlsaConfig(k_topics=2, seed=0, max_iterations=100))
print(f"converged after {len(model.iteration_log_likelihoods) - 1} iterations, "
      f"log-likelihood {model.final_log_likelihood:.3f}")

trace = model.iteration_log_likelihoods
print("monotone trace:", all(b >= a - 1e-9 for a, b in zip(trace, trace[1:])))
print()
for k in range(model.k_topics):
    print(f"topic {k + 1}: {top_words(model, k, 6)}")
