"""Okapi BM25 over the question side of a corpus.

The query-question similarity of a query q = w_1..w_L against question Q_n:

    score(q, Q_n) = sum_l  (k1+1) * f(w_l, Q_n)
                           ---------------------------------------------  * IQF(w_l)
                           k1 * ((1-b) + b * len(Q_n)/avg_len) + f(w_l, Q_n)

where f(w, Q_n) is the term frequency of w in Q_n and IQF is the inverse
question frequency.  Repeated query tokens contribute once per occurrence.

IQF uses the non-negative variant ln(1 + (N - n_w + 0.5)/(n_w + 0.5)) with
n_w the number of questions containing w, so downstream score
normalization stays well-behaved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .corpus import Corpus, build_corpus

FORMAT_ID = "faqfuse-bm25-v1"


@dataclass
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


def iqf(n_questions: int, n_containing: int) -> float:
    return math.log(1.0 + (n_questions - n_containing + 0.5) / (n_containing + 0.5))


@dataclass
class Bm25Index:
    postings: Dict[str, Dict[int, int]]   # token -> {question index: term frequency}
    question_lengths: List[int]
    avg_len: float
    iqf: Dict[str, float]
    params: Bm25Params
    n_questions: int
    _norm: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        # length-normalized denominator base, precomputed per question
        if not self._norm:
            k1, b = self.params.k1, self.params.b
            self._norm = [
                k1 * ((1.0 - b) + b * length / self.avg_len)
                for length in self.question_lengths
            ]

    def iqf_value(self, token: str) -> float:
        """IQF of a token; tokens unseen in any question get the n_w = 0 value."""
        got = self.iqf.get(token)
        if got is None:
            return iqf(self.n_questions, 0)
        return got


def build_index(corpus: Corpus, params: Bm25Params | None = None) -> Bm25Index:
    if len(corpus) == 0:
        raise ValueError("cannot index an empty corpus")
    params = params or Bm25Params()
    postings: Dict[str, Dict[int, int]] = {}
    lengths: List[int] = []
    for n, pair in enumerate(corpus.pairs):
        lengths.append(len(pair.question_tokens))
        for tok in pair.question_tokens:
            postings.setdefault(tok, {})
            postings[tok][n] = postings[tok].get(n, 0) + 1
    n_questions = len(corpus)
    avg_len = sum(lengths) / n_questions
    iqf_table = {tok: iqf(n_questions, len(entry)) for tok, entry in postings.items()}
    return Bm25Index(
        postings=postings,
        question_lengths=lengths,
        avg_len=avg_len,
        iqf=iqf_table,
        params=params,
        n_questions=n_questions,
    )


def score(index: Bm25Index, query_tokens: Sequence[str], n: int) -> float:
    """BM25 score of one question; out-of-vocabulary tokens contribute 0."""
    if not 0 <= n < index.n_questions:
        raise IndexError(f"question index {n} out of range [0, {index.n_questions})")
    k1 = index.params.k1
    norm = index._norm[n]
    total = 0.0
    for tok in query_tokens:
        entry = index.postings.get(tok)
        if not entry:
            continue
        f = entry.get(n, 0)
        if f == 0:
            continue
        total += (k1 + 1.0) * f / (norm + f) * index.iqf[tok]
    return total


def score_all(index: Bm25Index, query_tokens: Sequence[str]) -> List[float]:
    """Scores for every question, driven by the postings lists."""
    k1 = index.params.k1
    scores = [0.0] * index.n_questions
    for tok in query_tokens:
        entry = index.postings.get(tok)
        if not entry:
            continue
        w = index.iqf[tok]
        for n, f in entry.items():
            scores[n] += (k1 + 1.0) * f / (index._norm[n] + f) * w
    return scores


def rank(index: Bm25Index, query_tokens: Sequence[str], top_k: int) -> List[Tuple[int, float]]:
    """Top question indices by score, descending; ties by ascending index."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    scores = score_all(index, query_tokens)
    order = sorted(range(index.n_questions), key=lambda i: (-scores[i], i))
    return [(i, scores[i]) for i in order[: min(top_k, index.n_questions)]]


def _index_to_dict(index: Bm25Index) -> dict:
    return {
        "postings": {tok: {str(n): f for n, f in entry.items()} for tok, entry in index.postings.items()},
        "question_lengths": index.question_lengths,
        "avg_len": index.avg_len,
        "iqf": index.iqf,
        "params": {"k1": index.params.k1, "b": index.params.b},
        "n_questions": index.n_questions,
    }


def _index_from_dict(d: dict) -> Bm25Index:
    return Bm25Index(
        postings={tok: {int(n): f for n, f in entry.items()} for tok, entry in d["postings"].items()},
        question_lengths=list(d["question_lengths"]),
        avg_len=d["avg_len"],
        iqf=dict(d["iqf"]),
        params=Bm25Params(**d["params"]),
        n_questions=d["n_questions"],
    )


def save_index_bundle(path: str, index: Bm25Index, corpus: Corpus) -> None:
    """Index snapshot plus the corpus it was built over, so a query CLI can
    run from the one file."""
    bundle = {
        "format": FORMAT_ID,
        "tokenizer_mode": corpus.tokenizer_mode,
        "corpus": [
            {"id": p.id, "question": p.question, "answer": p.answer} for p in corpus.pairs
        ],
        "index": _index_to_dict(index),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(bundle, f, ensure_ascii=False, sort_keys=True)


def load_index_bundle(path: str) -> Tuple[Bm25Index, Corpus]:
    with open(path, "r", encoding="utf-8") as f:
        bundle = json.load(f)
    if bundle.get("format") != FORMAT_ID:
        raise ValueError(f"{path}: not a {FORMAT_ID} snapshot (format={bundle.get('format')!r})")
    corpus = build_corpus(
        [(r["id"], r["question"], r["answer"]) for r in bundle["corpus"]],
        bundle["tokenizer_mode"],
    )
    return _index_from_dict(bundle["index"]), corpus
