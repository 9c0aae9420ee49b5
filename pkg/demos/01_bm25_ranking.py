"""BM25 question ranking on a toy FAQ collection.

Builds the inverted index over the question side, scores a query against
every stored question, and prints the ranked list with the per-question
statistics that enter the formula.
"""

from faqfuse import Bm25Params, build_index, tokenize
from faqfuse.bm25 import rank, score
from faqfuse.corpus import build_corpus

corpus = build_corpus([
    ("0", "how do i pay the city tax", "visit the tax office counter b"),
    ("1", "where is the central library", "central square second floor"),
    ("2", "who has to pay city tax", "visit the tax office counter b"),
    ("3", "library opening hours on weekends", "nine to five saturday only"),
    ("4", "how do i renew a parking permit", "submit the renewal form online"),
], tokenizer_mode="unicode-word")

index = build_index(corpus, Bm25Params(k1=1.2, b=0.75))
print(f"{len(corpus)} questions, average length {index.avg_len:.2f} tokens")
print(f"IQF('tax') = {index.iqf['tax']:.4f}   IQF('the') = {index.iqf['the']:.4f}")
print()

query = "when can i pay my tax"
tokens = tokenize(query, "unicode-word")
print(f"query: {query!r} -> {tokens}")
for n, s in rank(index, tokens, top_k=5):
    print(f"  {s:7.4f}  {corpus.pairs[n].question}")

# repeated query terms add one contribution per occurrence
print()
print("score('tax')      =", round(score(index, ["tax"], 0), 4))
print("score('tax tax')  =", round(score(index, ["tax", "tax"], 0), 4))
