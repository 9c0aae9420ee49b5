"""PLSA topic model over question-answer pairs, trained with EM.

Each pair is one document: the question tokens concatenated with the
answer tokens.  The model decomposes the word-usage distribution of a
document as

    P(w | d_n) = sum_k P(w | T_k) * P(T_k | d_n)

and EM alternates the standard updates

    E:  P(T_k | d_n, w)  propto  P(w | T_k) * P(T_k | d_n)
    M:  P(w | T_k)  propto  sum_n c(w, d_n) * P(T_k | d_n, w)
        P(T_k | d_n)  propto  sum_w c(w, d_n) * P(T_k | d_n, w)

until the relative log-likelihood improvement drops below tolerance or the
iteration cap is hit.  Log-likelihood is non-decreasing across iterations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .corpus import Corpus

FORMAT_ID = "faqfuse-plsa-v1"

# guards divisions, never enters stored probabilities
_TINY = 1e-300


@dataclass
class PlsaConfig:
    k_topics: int = 10
    max_iterations: int = 200
    tolerance: float = 1e-6
    seed: int = 0
    smoothing_epsilon: float = 1e-10

    def __post_init__(self) -> None:
        if self.k_topics < 1:
            raise ValueError(f"k_topics must be >= 1, got {self.k_topics}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tolerance <= 0 or self.smoothing_epsilon <= 0:
            raise ValueError("tolerance and smoothing_epsilon must be positive")


@dataclass
class TopicModel:
    k_topics: int
    word_given_topic: np.ndarray        # K x V, rows sum to 1
    topic_given_doc: np.ndarray         # N x K, rows sum to 1
    vocab_tokens: List[str]             # column id -> token
    config: PlsaConfig
    final_log_likelihood: float
    iteration_log_likelihoods: List[float] = field(default_factory=list)

    @property
    def n_docs(self) -> int:
        return self.topic_given_doc.shape[0]

    @property
    def vocab_size(self) -> int:
        return len(self.vocab_tokens)


def _doc_counts(corpus: Corpus) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Per document: (vocab ids present, their counts)."""
    ids = corpus.vocabulary.ids
    docs = []
    for n in range(len(corpus)):
        counts: dict = {}
        for tok in corpus.document_tokens(n):
            w = ids[tok]
            counts[w] = counts.get(w, 0) + 1
        idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
        cnt = np.array([counts[w] for w in idx], dtype=np.float64)
        docs.append((idx, cnt))
    return docs


def _corpus_log_likelihood(
    docs: List[Tuple[np.ndarray, np.ndarray]],
    word_given_topic: np.ndarray,
    topic_given_doc: np.ndarray,
    epsilon: float,
) -> float:
    ll = 0.0
    for n, (idx, cnt) in enumerate(docs):
        mix = topic_given_doc[n] @ word_given_topic[:, idx]
        ll += float(cnt @ np.log(mix + epsilon))
    return ll


def train(corpus: Corpus, config: PlsaConfig | None = None) -> TopicModel:
    """Fit PLSA by EM.  Deterministic for a fixed seed.

    Topic-word rows start from a symmetric Dirichlet(1) draw; document-topic
    rows start uniform.  The returned model records the log-likelihood after
    every iteration and its final value.
    """
    config = config or PlsaConfig()
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    vocab_size = len(corpus.vocabulary)
    if vocab_size == 0:
        raise ValueError("corpus has an empty vocabulary")
    if config.k_topics > vocab_size:
        raise ValueError(f"k_topics={config.k_topics} exceeds vocabulary size {vocab_size}")

    docs = _doc_counts(corpus)
    n_docs = len(docs)
    k = config.k_topics
    rng = np.random.default_rng(config.seed)
    word_given_topic = rng.dirichlet(np.ones(vocab_size), size=k)
    topic_given_doc = np.full((n_docs, k), 1.0 / k)

    trace: List[float] = []
    for _ in range(config.max_iterations):
        new_wt = np.zeros((k, vocab_size))
        new_td = np.zeros((n_docs, k))
        ll = 0.0  # likelihood of the parameters entering this iteration
        for n, (idx, cnt) in enumerate(docs):
            phi = word_given_topic[:, idx] * topic_given_doc[n][:, None]   # K x m
            denom = phi.sum(axis=0)
            ll += float(cnt @ np.log(denom + config.smoothing_epsilon))
            weighted = phi / np.maximum(denom, _TINY) * cnt
            new_wt[:, idx] += weighted
            new_td[n] = weighted.sum(axis=1)
        word_given_topic = new_wt / np.maximum(new_wt.sum(axis=1, keepdims=True), _TINY)
        topic_given_doc = new_td / np.maximum(new_td.sum(axis=1, keepdims=True), _TINY)
        trace.append(ll)
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if abs(cur - prev) <= config.tolerance * max(abs(prev), 1.0):
                break

    final_ll = _corpus_log_likelihood(docs, word_given_topic, topic_given_doc, config.smoothing_epsilon)
    trace.append(final_ll)
    return TopicModel(
        k_topics=k,
        word_given_topic=word_given_topic,
        topic_given_doc=topic_given_doc,
        vocab_tokens=corpus.vocabulary.tokens(),
        config=config,
        final_log_likelihood=final_ll,
        iteration_log_likelihoods=trace,
    )


def log_likelihood(model: TopicModel, corpus: Corpus) -> float:
    """sum_n sum_w c(w, d_n) * ln(P(w | d_n) + epsilon) under the model.

    The corpus must be the one the model was trained on (document-topic
    rows are positional); its vocabulary must be covered by the model's.
    """
    if len(corpus) != model.n_docs:
        raise ValueError(f"corpus has {len(corpus)} documents, model was trained on {model.n_docs}")
    ids = {tok: i for i, tok in enumerate(model.vocab_tokens)}
    missing = [t for t in corpus.vocabulary.ids if t not in ids]
    if missing:
        raise ValueError(f"model vocabulary does not cover corpus tokens, e.g. {missing[0]!r}")
    docs = []
    for n in range(len(corpus)):
        counts: dict = {}
        for tok in corpus.document_tokens(n):
            w = ids[tok]
            counts[w] = counts.get(w, 0) + 1
        idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
        cnt = np.array([counts[w] for w in idx], dtype=np.float64)
        docs.append((idx, cnt))
    return _corpus_log_likelihood(docs, model.word_given_topic, model.topic_given_doc, model.config.smoothing_epsilon)


def top_words(model: TopicModel, topic: int, top_l: int) -> List[str]:
    """The top_l words with the largest P(w | T_topic), ties by vocab id."""
    if not 0 <= topic < model.k_topics:
        raise IndexError(f"topic {topic} out of range [0, {model.k_topics})")
    if not 1 <= top_l <= model.vocab_size:
        raise ValueError(f"top_l must be in [1, {model.vocab_size}], got {top_l}")
    p = model.word_given_topic[topic]
    order = sorted(range(model.vocab_size), key=lambda i: (-p[i], i))
    return [model.vocab_tokens[i] for i in order[:top_l]]


def save_model(model: TopicModel, path: str) -> None:
    payload = {
        "format": FORMAT_ID,
        "k_topics": model.k_topics,
        "vocabulary": model.vocab_tokens,
        "word_given_topic": model.word_given_topic.tolist(),
        "topic_given_doc": model.topic_given_doc.tolist(),
        "config": {
            "k_topics": model.config.k_topics,
            "max_iterations": model.config.max_iterations,
            "tolerance": model.config.tolerance,
            "seed": model.config.seed,
            "smoothing_epsilon": model.config.smoothing_epsilon,
        },
        "final_log_likelihood": model.final_log_likelihood,
        "iteration_log_likelihoods": model.iteration_log_likelihoods,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, sort_keys=True)


def load_model(path: str) -> TopicModel:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("format") != FORMAT_ID:
        raise ValueError(f"{path}: not a {FORMAT_ID} snapshot (format={payload.get('format')!r})")
    return TopicModel(
        k_topics=payload["k_topics"],
        word_given_topic=np.array(payload["word_given_topic"]),
        topic_given_doc=np.array(payload["topic_given_doc"]),
        vocab_tokens=list(payload["vocabulary"]),
        config=PlsaConfig(**payload["config"]),
        final_log_likelihood=payload["final_log_likelihood"],
        iteration_log_likelihoods=list(payload["iteration_log_likelihoods"]),
    )
