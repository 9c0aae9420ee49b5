"""Query-answer relevance scorers behind one interface.

A relevance scorer turns a query into a posterior over the corpus's
distinct answers (FAQ mode) or a pair of questions into a similarity in
[0, 1] (matching mode).  The built-in baseline is TF-IDF cosine over the
answer texts with a softmax on top: deterministic and cheap, it exercises
every downstream contract without a neural backend.  RemoteScorer speaks
the HTTP wire protocol, so a model server can slot in unchanged.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections import Counter
from typing import Dict, List, Optional

import requests

from .corpus import Corpus, tokenize
from .knowledge import InjectedSequence, injected_to_dict

AnswerDistribution = Dict[str, float]

DEFAULT_TIMEOUT = 10.0


class ScorerError(Exception):
    pass


class ScorerTransportError(ScorerError):
    """Remote scorer unreachable or failed mid-request."""


class ScorerTimeoutError(ScorerTransportError):
    """Remote scorer did not answer within the timeout."""


class ScorerProtocolError(ScorerError):
    """Remote scorer answered, but the payload violates the protocol."""


def validate_distribution(probs: AnswerDistribution, answer_ids: List[str], tol: float = 1e-6) -> None:
    missing = set(answer_ids) - set(probs)
    if missing:
        raise ValueError(f"distribution misses {len(missing)} answer ids, e.g. {sorted(missing)[0]!r}")
    extra = set(probs) - set(answer_ids)
    if extra:
        raise ValueError(f"distribution carries {len(extra)} unknown answer ids, e.g. {sorted(extra)[0]!r}")
    if any(p < 0 for p in probs.values()):
        raise ValueError("distribution has negative probabilities")
    total = sum(probs.values())
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution sums to {total}, not 1")


class RelevanceScorer(ABC):
    """Interface for the supervised query-answer relevance measure.

    Implementations are immutable after construction and safe to call
    concurrently.  The optional injected sequence carries soft positions
    and a visible matrix for knowledge-aware backends; backends that
    cannot consume it just ignore it.
    """

    answer_ids: List[str]

    @abstractmethod
    def score_answers(self, query: str, injected: Optional[InjectedSequence] = None) -> AnswerDistribution:
        """Posterior over the fixed answer set given the query."""

    @abstractmethod
    def score_pair(
        self,
        left: str,
        right: str,
        injected_left: Optional[InjectedSequence] = None,
        injected_right: Optional[InjectedSequence] = None,
    ) -> float:
        """Similarity of two questions in [0, 1]."""


def _softmax(values: List[float]) -> List[float]:
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


class BaselineScorer(RelevanceScorer):
    """TF-IDF cosine against each distinct answer, softmax over the cosines.

    tf is the raw count; idf(w) = ln((1 + N) / (1 + df(w))) + 1 with N the
    number of distinct answers and df the number of answers containing w.
    Query tokens absent from every answer are dropped for the FAQ mode;
    for pair scoring both texts keep all tokens (df = 0 idf applies), so
    identical texts always score 1.
    """

    def __init__(self, corpus: Corpus):
        if len(corpus) == 0:
            raise ValueError("cannot fit a scorer on an empty corpus")
        self.tokenizer_mode = corpus.tokenizer_mode
        self.answer_ids = list(corpus.answers)
        n = len(self.answer_ids)
        df: Counter = Counter()
        answer_counts: Dict[str, Counter] = {}
        for aid in self.answer_ids:
            counts = Counter(corpus.answer_tokens(aid))
            answer_counts[aid] = counts
            for tok in counts:
                df[tok] += 1
        self._idf = {tok: math.log((1.0 + n) / (1.0 + d)) + 1.0 for tok, d in df.items()}
        self._oov_idf = math.log(1.0 + n) + 1.0
        self._vectors: Dict[str, Dict[str, float]] = {}
        self._norms: Dict[str, float] = {}
        for aid, counts in answer_counts.items():
            vec = {tok: c * self._idf[tok] for tok, c in counts.items()}
            self._vectors[aid] = vec
            self._norms[aid] = math.sqrt(sum(v * v for v in vec.values()))

    def _vectorize(self, text: str, keep_oov: bool) -> Dict[str, float]:
        vec: Dict[str, float] = {}
        for tok, c in Counter(tokenize(text, self.tokenizer_mode)).items():
            idf = self._idf.get(tok)
            if idf is None:
                if not keep_oov:
                    continue
                idf = self._oov_idf
            vec[tok] = c * idf
        return vec

    @staticmethod
    def _cosine(a: Dict[str, float], norm_a: float, b: Dict[str, float], norm_b: float) -> float:
        if norm_a == 0.0 or norm_b == 0.0:
            return 0.0
        if len(b) < len(a):
            a, b = b, a
        dot = sum(v * b.get(tok, 0.0) for tok, v in a.items())
        return dot / (norm_a * norm_b)

    def score_answers(self, query: str, injected: Optional[InjectedSequence] = None) -> AnswerDistribution:
        q = self._vectorize(query, keep_oov=False)
        q_norm = math.sqrt(sum(v * v for v in q.values()))
        cosines = [
            self._cosine(q, q_norm, self._vectors[aid], self._norms[aid])
            for aid in self.answer_ids
        ]
        probs = _softmax(cosines)
        return dict(zip(self.answer_ids, probs))

    def score_pair(
        self,
        left: str,
        right: str,
        injected_left: Optional[InjectedSequence] = None,
        injected_right: Optional[InjectedSequence] = None,
    ) -> float:
        a = self._vectorize(left, keep_oov=True)
        b = self._vectorize(right, keep_oov=True)
        norm_a = math.sqrt(sum(v * v for v in a.values()))
        norm_b = math.sqrt(sum(v * v for v in b.values()))
        sim = self._cosine(a, norm_a, b, norm_b)
        # cosine of non-negative vectors; clamp float dust
        return min(1.0, max(0.0, sim))


def baseline_fit(corpus: Corpus) -> BaselineScorer:
    """Fit the deterministic TF-IDF baseline on a corpus's answer set."""
    return BaselineScorer(corpus)


class RemoteScorer(RelevanceScorer):
    """Client for the /score wire protocol.

    No retries (idempotence of the backend is unknown); timeouts and
    connection failures raise transport errors, schema violations raise
    protocol errors.  Returned FAQ distributions are validated to sum to 1
    within 1e-3, then renormalized exactly.
    """

    def __init__(self, url: str, answer_ids: List[str], timeout: float = DEFAULT_TIMEOUT):
        self.url = url.rstrip("/")
        self.answer_ids = list(answer_ids)
        self.timeout = timeout
        self._session = requests.Session()

    def _post(self, payload: dict) -> dict:
        try:
            resp = self._session.post(f"{self.url}/score", json=payload, timeout=self.timeout)
        except requests.exceptions.Timeout as e:
            raise ScorerTimeoutError(f"scorer at {self.url} timed out after {self.timeout}s") from e
        except requests.exceptions.RequestException as e:
            raise ScorerTransportError(f"scorer at {self.url} unreachable: {e}") from e
        if resp.status_code != 200:
            raise ScorerProtocolError(f"scorer returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as e:
            raise ScorerProtocolError(f"scorer returned non-JSON body: {resp.text[:200]}") from e

    def score_answers(self, query: str, injected: Optional[InjectedSequence] = None) -> AnswerDistribution:
        body = self._post({
            "mode": "faq",
            "query": query,
            "injected": injected_to_dict(injected) if injected is not None else None,
            "answer_ids": self.answer_ids,
        })
        probs = body.get("probs")
        if not isinstance(probs, dict):
            raise ScorerProtocolError("response misses 'probs' object")
        try:
            probs = {aid: float(p) for aid, p in probs.items()}
            validate_distribution(probs, self.answer_ids, tol=1e-3)
        except (TypeError, ValueError) as e:
            raise ScorerProtocolError(str(e)) from e
        total = sum(probs.values())
        return {aid: p / total for aid, p in probs.items()}

    def score_pair(
        self,
        left: str,
        right: str,
        injected_left: Optional[InjectedSequence] = None,
        injected_right: Optional[InjectedSequence] = None,
    ) -> float:
        body = self._post({
            "mode": "match",
            "left": left,
            "right": right,
            "injected_left": injected_to_dict(injected_left) if injected_left is not None else None,
            "injected_right": injected_to_dict(injected_right) if injected_right is not None else None,
        })
        sim = body.get("similarity")
        if not isinstance(sim, (int, float)) or isinstance(sim, bool) or not 0.0 <= float(sim) <= 1.0:
            raise ScorerProtocolError(f"response 'similarity' must be a real in [0, 1], got {sim!r}")
        return float(sim)

    def health(self) -> dict:
        try:
            resp = self._session.get(f"{self.url}/health", timeout=self.timeout)
        except requests.exceptions.Timeout as e:
            raise ScorerTimeoutError(f"scorer at {self.url} timed out after {self.timeout}s") from e
        except requests.exceptions.RequestException as e:
            raise ScorerTransportError(f"scorer at {self.url} unreachable: {e}") from e
        if resp.status_code != 200:
            raise ScorerProtocolError(f"health returned HTTP {resp.status_code}")
        return resp.json()
