"""Score fusion, answer voting, and the retrieval/matching pipelines.

The fused ranking score of pair n for a query q is

    rs_n = alpha * bm25_n / sum_n' bm25_n'  +  (1 - alpha) * P(A_n | q)

When the query shares no term with any question the BM25 quotient is
undefined; every normalized BM25 term is then 0 and rs falls back to the
relevance measure alone.

Voting looks at the top-M fused results: an answer occurring at least
ceil(M/2) times there wins, otherwise the top-1 answer does.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .bm25 import Bm25Index, score_all
from .corpus import Corpus, tokenize
from .knowledge import InjectionConfig, KnowledgeBase, inject
from .scorer import AnswerDistribution, RelevanceScorer


@dataclass
class FusionConfig:
    alpha: float = 0.5
    vote_m: int = 5
    voting_enabled: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.vote_m < 1:
            raise ValueError(f"vote_m must be >= 1, got {self.vote_m}")


@dataclass
class ScoredPair:
    pair_index: int
    answer_id: str
    bm25_raw: float
    bm25_norm: float
    relevance: float
    rs: float


@dataclass
class RankedList:
    entries: List[ScoredPair]           # sorted by rs desc, ties by pair_index
    chosen_answer: str
    vote_applied: bool


def fuse(
    bm25_scores: Sequence[float],
    relevance: AnswerDistribution,
    answer_ids: Sequence[str],
    alpha: float,
) -> List[ScoredPair]:
    """Combine per-pair BM25 with the answer posterior; unsorted."""
    if len(bm25_scores) != len(answer_ids):
        raise ValueError(f"{len(bm25_scores)} scores for {len(answer_ids)} pairs")
    missing = set(answer_ids) - set(relevance)
    if missing:
        raise ValueError(f"relevance misses answer ids, e.g. {sorted(missing)[0]!r}")
    total = sum(bm25_scores)
    out = []
    for n, (raw, aid) in enumerate(zip(bm25_scores, answer_ids)):
        norm = raw / total if total > 0 else 0.0
        rel = relevance[aid]
        out.append(ScoredPair(
            pair_index=n,
            answer_id=aid,
            bm25_raw=raw,
            bm25_norm=norm,
            relevance=rel,
            rs=alpha * norm + (1.0 - alpha) * rel,
        ))
    return out


def vote(ranked: List[ScoredPair], m: int) -> str:
    """Majority answer among the top-m entries, else the top-1 answer.

    An answer qualifies with at least ceil(m/2) occurrences; among several
    qualifying answers (possible for even m) the one whose best entry
    ranks higher wins.
    """
    if not ranked:
        raise ValueError("ranked list must be non-empty")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    top = ranked[: min(m, len(ranked))]
    counts = Counter(entry.answer_id for entry in top)
    threshold = math.ceil(m / 2)
    best_rank = {}
    for rank_pos, entry in enumerate(top):
        best_rank.setdefault(entry.answer_id, rank_pos)
    qualifying = [aid for aid, c in counts.items() if c >= threshold]
    if qualifying:
        return min(qualifying, key=lambda aid: best_rank[aid])
    return top[0].answer_id


@dataclass
class Pipeline:
    """Everything needed to answer queries, immutable after assembly."""

    corpus: Corpus
    index: Bm25Index
    scorer: Optional[RelevanceScorer]
    kb: Optional[KnowledgeBase] = None
    fusion: FusionConfig = field(default_factory=FusionConfig)
    injection: InjectionConfig = field(default_factory=InjectionConfig)

    def __post_init__(self) -> None:
        if self.index.n_questions != len(self.corpus):
            raise ValueError("index and corpus disagree on the number of questions")
        if self.scorer is None and self.fusion.alpha != 1.0:
            raise ValueError(
                "a pipeline without a relevance scorer is BM25-only and requires alpha = 1.0 "
                f"(got alpha = {self.fusion.alpha})"
            )

    @property
    def answer_ids(self) -> List[str]:
        return [p.answer_id for p in self.corpus.pairs]


def retrieve(pipeline: Pipeline, query: str, top_k: Optional[int] = None) -> RankedList:
    """Rank every pair for the query and choose an answer.

    Tokenizes with the corpus tokenizer, scores BM25 over all questions,
    obtains the answer posterior (injecting knowledge first when a base is
    configured), fuses, sorts, and applies voting when enabled.
    """
    tokens = tokenize(query, pipeline.corpus.tokenizer_mode)
    raw = score_all(pipeline.index, tokens)
    if pipeline.scorer is not None:
        injected = None
        if pipeline.kb is not None and len(pipeline.kb) > 0 and tokens:
            injected = inject(tokens, pipeline.kb, pipeline.injection)
        relevance = pipeline.scorer.score_answers(query, injected)
    else:
        relevance = {aid: 0.0 for aid in pipeline.corpus.answers}
    entries = fuse(raw, relevance, pipeline.answer_ids, pipeline.fusion.alpha)
    entries.sort(key=lambda e: (-e.rs, e.pair_index))
    if pipeline.fusion.voting_enabled:
        chosen = vote(entries, pipeline.fusion.vote_m)
    else:
        chosen = entries[0].answer_id
    if top_k is not None:
        keep = max(top_k, pipeline.fusion.vote_m if pipeline.fusion.voting_enabled else 1)
        entries = entries[:keep]
    return RankedList(entries=entries, chosen_answer=chosen, vote_applied=pipeline.fusion.voting_enabled)


def _bm25_one_document(index: Bm25Index, query_tokens: Sequence[str], doc_tokens: Sequence[str]) -> float:
    """BM25 of a query against one ad-hoc document, reusing the collection's
    IQF table and average length."""
    k1, b = index.params.k1, index.params.b
    freq = Counter(doc_tokens)
    norm = k1 * ((1.0 - b) + b * len(doc_tokens) / index.avg_len)
    total = 0.0
    for tok in query_tokens:
        f = freq.get(tok, 0)
        if f == 0:
            continue
        total += (k1 + 1.0) * f / (norm + f) * index.iqf_value(tok)
    return total


def match(pipeline: Pipeline, left: str, right: str) -> Tuple[float, int]:
    """Similarity of two questions in [0, 1]; label 1 iff score >= 0.5.

    The BM25 term treats `right` as a one-question collection with the
    pipeline corpus's IQF and length statistics, so its normalized form
    degenerates to 1 when any term matches and 0 otherwise; the scorer's
    pair similarity carries the graded signal.
    """
    if not left.strip() or not right.strip():
        raise ValueError("both texts must be non-empty")
    mode = pipeline.corpus.tokenizer_mode
    tokens_l = tokenize(left, mode)
    tokens_r = tokenize(right, mode)
    raw = _bm25_one_document(pipeline.index, tokens_l, tokens_r) if tokens_r else 0.0
    bm25_norm = 1.0 if raw > 0 else 0.0
    alpha = pipeline.fusion.alpha
    if pipeline.scorer is not None:
        injected_l = injected_r = None
        if pipeline.kb is not None and len(pipeline.kb) > 0:
            if tokens_l:
                injected_l = inject(tokens_l, pipeline.kb, pipeline.injection)
            if tokens_r:
                injected_r = inject(tokens_r, pipeline.kb, pipeline.injection)
        sim = pipeline.scorer.score_pair(left, right, injected_l, injected_r)
    else:
        sim = 0.0
    score = alpha * bm25_norm + (1.0 - alpha) * sim
    return score, 1 if score >= 0.5 else 0
