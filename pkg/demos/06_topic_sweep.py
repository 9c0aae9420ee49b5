"""Retrieval quality as a function of the PLSA topic count.

Mirrors the topic-count experiment shape: per K, train a topic model on
the training split, mine topical triplets, assemble the pipeline, and
score the validation queries.  Prints one metrics row per K.

With the built-in baseline scorer the rows coincide: TF-IDF cosine cannot
consume the injected triplets, so K changes nothing.  Point the scorer
spec at a knowledge-aware backend (scorer type "remote") and the sweep
becomes the real topic-count experiment.
"""

import json
import pathlib
import tempfile

from faqfuse import PipelineConfig, PlsaConfig, sweep_topics
from faqfuse.config import KnowledgeSpec

fixture = pathlib.Path(__file__).parent.parent / "tests" / "fixtures" / "toy_corpus.jsonl"

with tempfile.TemporaryDirectory() as tmp:
    corpus_path = pathlib.Path(tmp) / "corpus.jsonl"
    corpus_path.write_text(fixture.read_text(encoding="utf-8"), encoding="utf-8")
    config = PipelineConfig(
        corpus_path=str(corpus_path),
        tokenizer_mode="unicode-word",
        plsa=PlsaConfig(k_topics=10, max_iterations=50, seed=3),
        knowledge=KnowledgeSpec(topical=True, topical_top_l=3),
        split_ratios=(0.6, 0.2, 0.2),
        split_seed=9,
    )
    rows = sweep_topics(config, k_values=[1, 2, 5, 10], eval_split="valid")

print(f"{'K':>4}  {'accuracy':>8}  {'mrr':>6}  {'f1':>6}")
for row in rows:
    if row["error"]:
        print(f"{row['k_topics']:>4}  failed: {row['error']}")
    else:
        print(f"{row['k_topics']:>4}  {row['accuracy']:>8.3f}  {row['mrr']:>6.3f}  {row['f1']:>6.3f}")
