"""Hybrid retrieval: normalized BM25 fused with answer relevance, then a
majority vote over the top results.

The fused score of pair n is  alpha * bm25_n / sum(bm25) + (1-alpha) * P(A_n|q).
Voting picks an answer occurring >= ceil(M/2) times in the top M, else the
top-1 answer; answers shared by several questions benefit.
"""

from faqfuse import FusionConfig, Pipeline, build_index, baseline_fit, retrieve
from faqfuse.corpus import build_corpus

corpus = build_corpus([
    ("0", "city tax payment deadline", "tax is due at the end of april"),
    ("1", "when must the city tax be paid", "tax is due at the end of april"),
    ("2", "city tax rate for this year", "the rate is unchanged this year"),
    ("3", "where is the library", "central square second floor"),
], tokenizer_mode="unicode-word")

index = build_index(corpus)
scorer = baseline_fit(corpus)

for voting in (False, True):
    pipeline = Pipeline(corpus=corpus, index=index, scorer=scorer,
                        fusion=FusionConfig(alpha=0.7, vote_m=3, voting_enabled=voting))
    ranked = retrieve(pipeline, "city tax rate deadline")
    print(f"voting={voting}")
    for e in ranked.entries:
        print(f"  rs={e.rs:.4f}  bm25_norm={e.bm25_norm:.4f}  relevance={e.relevance:.4f}  "
              f"{corpus.pairs[e.pair_index].question}")
    print(f"  -> chosen: {corpus.answers[ranked.chosen_answer]!r}")
    print()
