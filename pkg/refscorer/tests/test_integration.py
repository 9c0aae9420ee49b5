"""End-to-end check against the retrieval stack, when it is installed.

Runs the faqfuse pipeline with this service as its remote scorer and
verifies the wire contract holds under real traffic.  Skips cleanly when
faqfuse is not importable (this package stands alone).
"""

import pytest

faqfuse = pytest.importorskip("faqfuse")

from faqfuse.bm25 import build_index
from faqfuse.corpus import load_corpus
from faqfuse.ranking import FusionConfig, Pipeline, retrieve
from faqfuse.scorer import RemoteScorer


def test_pipeline_with_remote_refscorer(served, toy_corpus_path):
    corpus = load_corpus(toy_corpus_path, "jsonl", "unicode-word")
    scorer = RemoteScorer(served, list(corpus.answers), timeout=15.0)
    assert scorer.health()["status"] == "ok"
    pipeline = Pipeline(corpus=corpus, index=build_index(corpus), scorer=scorer,
                        fusion=FusionConfig(alpha=0.5, vote_m=5, voting_enabled=True))
    for pair in corpus.pairs[:5]:
        ranked = retrieve(pipeline, pair.question)
        assert ranked.chosen_answer in corpus.answers
        # every entry's relevance is the serving model's posterior for it
        probs = scorer.score_answers(pair.question)
        for entry in ranked.entries:
            assert entry.relevance == pytest.approx(probs[entry.answer_id], abs=1e-9)
        total = sum(e.bm25_norm for e in ranked.entries)
        assert total == pytest.approx(1.0, abs=1e-9) or total == 0.0


def test_answer_identity_convention_matches(toy_corpus_path):
    # both packages derive the same answer ids from the same corpus file
    from refscorer.text import answer_identity as theirs
    corpus = load_corpus(toy_corpus_path, "jsonl", "unicode-word")
    for pair in corpus.pairs:
        assert theirs(pair.answer) == pair.answer_id
