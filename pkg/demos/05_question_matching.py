"""Question matching: is this pair asking the same thing?

The pipeline scores a pair as alpha * bm25 + (1-alpha) * pair-similarity,
where the BM25 side treats the right question as a one-document collection
(so it reduces to overlap yes/no) and the scorer contributes the graded
cosine.  Label 1 means score >= 0.5.
"""

from faqfuse import FusionConfig, Pipeline, build_index, baseline_fit, match
from faqfuse.corpus import build_corpus

corpus = build_corpus([
    ("0", "how do i pay the city tax", "visit the tax office"),
    ("1", "where is the central library", "central square"),
    ("2", "how do i renew a parking permit", "submit the form"),
], tokenizer_mode="unicode-word")

pipeline = Pipeline(corpus=corpus, index=build_index(corpus),
                    scorer=baseline_fit(corpus), fusion=FusionConfig(alpha=0.3))

pairs = [
    ("how do i pay the city tax", "how can i pay my city tax"),
    ("how do i pay the city tax", "where is the central library"),
    ("renew parking permit", "parking permit renewal"),
    ("completely unrelated words", "nothing shared here"),
]
for left, right in pairs:
    score, label = match(pipeline, left, right)
    print(f"score={score:.4f}  label={label}  {left!r} vs {right!r}")
