"""Question-answer collections: tokenization, loading, dedup, splits.

A corpus is an ordered list of (question, answer) pairs.  Answers are
deduplicated by exact string identity after Unicode NFC normalization, so
the same answer attached to several questions gets one stable answer id
(a content hash, which survives corpus subsetting).
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

TOKENIZER_MODES = ("char", "unicode-word")

_WORD_RE = re.compile(r"\w+", re.UNICODE)

# Han ideographs, kana, Hangul syllables: scripts written without spaces,
# split per character in "char" mode.
_CJK_RANGES = (
    (0x3040, 0x30FF),   # hiragana, katakana
    (0x3400, 0x4DBF),   # CJK extension A
    (0x4E00, 0x9FFF),   # CJK unified ideographs
    (0xAC00, 0xD7AF),   # Hangul syllables
    (0xF900, 0xFAFF),   # CJK compatibility ideographs
    (0x20000, 0x2EBEF), # CJK extensions B..F
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str, mode: str = "char") -> List[str]:
    """Deterministic tokenization; NFC-normalizes and lowercases first.

    "char" emits one token per CJK character and groups contiguous runs of
    other alphanumeric characters (Latin words, digits).  "unicode-word"
    emits maximal runs of word characters; CJK runs stay contiguous there,
    which is why "char" is the right default for CJK-dominant text.
    """
    if mode not in TOKENIZER_MODES:
        raise ValueError(f"unknown tokenizer mode: {mode!r}")
    text = unicodedata.normalize("NFC", text).lower()
    if mode == "unicode-word":
        return _WORD_RE.findall(text)
    tokens: List[str] = []
    run: List[str] = []
    for ch in text:
        if _is_cjk(ch):
            if run:
                tokens.append("".join(run))
                run = []
            tokens.append(ch)
        elif ch.isalnum():
            run.append(ch)
        else:
            if run:
                tokens.append("".join(run))
                run = []
    if run:
        tokens.append("".join(run))
    return tokens


def answer_identity(answer: str) -> str:
    """Stable id for an answer string: hash of its NFC form.

    Byte-identical answers (after NFC) share the id, across corpora and
    splits alike.
    """
    normalized = unicodedata.normalize("NFC", answer)
    return hashlib.sha1(normalized.encode("utf-8")).hexdigest()[:12]


@dataclass
class QAPair:
    id: str
    question: str
    answer: str
    question_tokens: List[str]
    answer_id: str


@dataclass
class QuestionPair:
    left: str
    right: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class Vocabulary:
    """token -> integer id, plus corpus-wide occurrence counts."""

    ids: Dict[str, int] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)

    def add(self, token: str) -> int:
        if token not in self.ids:
            self.ids[token] = len(self.ids)
            self.counts[token] = 0
        self.counts[token] += 1
        return self.ids[token]

    def tokens(self) -> List[str]:
        """Tokens ordered by id."""
        out = [""] * len(self.ids)
        for tok, i in self.ids.items():
            out[i] = tok
        return out

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, token: str) -> bool:
        return token in self.ids


@dataclass
class Corpus:
    pairs: List[QAPair]
    answers: Dict[str, str]             # answer_id -> answer text
    vocabulary: Vocabulary
    tokenizer_mode: str = "char"
    _answer_tokens: Dict[str, List[str]] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.pairs)

    def questions(self) -> List[List[str]]:
        return [p.question_tokens for p in self.pairs]

    def answer_tokens(self, answer_id: str) -> List[str]:
        if answer_id not in self._answer_tokens:
            self._answer_tokens[answer_id] = tokenize(self.answers[answer_id], self.tokenizer_mode)
        return self._answer_tokens[answer_id]

    def document_tokens(self, n: int) -> List[str]:
        """Tokens of pair n's question concatenated with its answer."""
        pair = self.pairs[n]
        return pair.question_tokens + self.answer_tokens(pair.answer_id)


def build_corpus(
    records: Iterable[Tuple[str, str, str]],
    tokenizer_mode: str = "char",
) -> Corpus:
    """Assemble a Corpus from (id, question, answer) records.

    Questions and answers must be non-empty after trimming; ids must be
    unique.  The vocabulary covers question and answer tokens.
    """
    pairs: List[QAPair] = []
    answers: Dict[str, str] = {}
    vocab = Vocabulary()
    seen_ids = set()
    for pair_id, question, answer in records:
        question = question.strip()
        answer = answer.strip()
        if not question:
            raise ValueError(f"pair {pair_id!r}: empty question")
        if not answer:
            raise ValueError(f"pair {pair_id!r}: empty answer")
        if pair_id in seen_ids:
            raise ValueError(f"duplicate pair id {pair_id!r}")
        seen_ids.add(pair_id)
        q_tokens = tokenize(question, tokenizer_mode)
        aid = answer_identity(answer)
        answers.setdefault(aid, unicodedata.normalize("NFC", answer))
        pairs.append(QAPair(pair_id, question, answer, q_tokens, aid))
        for tok in q_tokens:
            vocab.add(tok)
        for tok in tokenize(answer, tokenizer_mode):
            vocab.add(tok)
    return Corpus(pairs=pairs, answers=answers, vocabulary=vocab, tokenizer_mode=tokenizer_mode)


def load_corpus(path: str, format: str = "jsonl", tokenizer_mode: str = "char") -> Corpus:
    """Load a corpus file.

    jsonl: one object per line, {"id": ..., "question": ..., "answer": ...},
    id optional (defaults to the zero-based line index in decimal).
    tsv: question<TAB>answer per line, no header.
    """
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown corpus format: {format!r}")
    records: List[Tuple[str, str, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            if format == "jsonl":
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError as e:
                    raise ValueError(f"{path}:{lineno + 1}: invalid JSON: {e}") from e
                if not isinstance(obj, dict) or "question" not in obj or "answer" not in obj:
                    raise ValueError(f"{path}:{lineno + 1}: object must carry 'question' and 'answer'")
                pair_id = str(obj.get("id", lineno))
                records.append((pair_id, str(obj["question"]), str(obj["answer"])))
            else:
                parts = stripped.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno + 1}: expected question<TAB>answer, got {len(parts)} fields")
                records.append((str(lineno), parts[0], parts[1]))
    try:
        return build_corpus(records, tokenizer_mode)
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e


def save_corpus(corpus: Corpus, path: str, format: str = "jsonl") -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pair in corpus.pairs:
            if format == "jsonl":
                f.write(json.dumps(
                    {"id": pair.id, "question": pair.question, "answer": pair.answer},
                    ensure_ascii=False,
                ) + "\n")
            elif format == "tsv":
                f.write(f"{pair.question}\t{pair.answer}\n")
            else:
                raise ValueError(f"unknown corpus format: {format!r}")


def load_question_pairs(path: str) -> List[QuestionPair]:
    """Question-pair TSV for matching mode: left<TAB>right<TAB>label."""
    pairs: List[QuestionPair] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            parts = stripped.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno + 1}: expected left<TAB>right<TAB>label")
            try:
                label = int(parts[2])
            except ValueError as e:
                raise ValueError(f"{path}:{lineno + 1}: label must be 0 or 1") from e
            if label not in (0, 1):
                raise ValueError(f"{path}:{lineno + 1}: label must be 0 or 1")
            pairs.append(QuestionPair(parts[0], parts[1], label))
    return pairs


def subset_corpus(corpus: Corpus, indices: Sequence[int]) -> Corpus:
    """New corpus over a subset of pairs; answer ids are content hashes so
    they stay comparable across subsets."""
    records = [(corpus.pairs[i].id, corpus.pairs[i].question, corpus.pairs[i].answer) for i in indices]
    return build_corpus(records, corpus.tokenizer_mode)


def split_corpus(
    corpus: Corpus,
    ratios: Tuple[float, float, float],
    seed: int,
) -> Tuple[Corpus, Corpus, Corpus]:
    """Random disjoint train/valid/test partition.

    Valid and test take floor(ratio * N) pairs each; the remainder goes to
    train.  Deterministic for a fixed seed.
    """
    if len(corpus) == 0:
        raise ValueError("cannot split an empty corpus")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    n = len(corpus)
    # floor(ratio * n), robust to float dust (0.29 * 100 == 28.999...96)
    n_valid = int(ratios[1] * n + 1e-9)
    n_test = int(ratios[2] * n + 1e-9)
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = sorted(perm[: n - n_valid - n_test].tolist())
    valid_idx = sorted(perm[n - n_valid - n_test : n - n_test].tolist())
    test_idx = sorted(perm[n - n_test :].tolist())
    return (
        subset_corpus(corpus, train_idx),
        subset_corpus(corpus, valid_idx),
        subset_corpus(corpus, test_idx),
    )
