"""Text-side interfaces shared with the retrieval stack.

The corpus file format and the answer-identity derivation are the
published interfaces this service consumes; both are reimplemented here
so the package stands alone.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from typing import Dict, List, Tuple

_WORD_RE = re.compile(r"\w+", re.UNICODE)

PAD, UNK, SEP = "<pad>", "<unk>", "<sep>"
SPECIALS = [PAD, UNK, SEP]


def tokenize(text: str) -> List[str]:
    """NFC-normalize, lowercase, emit maximal word-character runs."""
    return _WORD_RE.findall(unicodedata.normalize("NFC", text).lower())


def answer_identity(answer: str) -> str:
    """First 12 hex chars of sha1 over the NFC-normalized answer text;
    the id convention of the retrieval stack's corpus files."""
    normalized = unicodedata.normalize("NFC", answer.strip())
    return hashlib.sha1(normalized.encode("utf-8")).hexdigest()[:12]


def load_corpus_jsonl(path: str) -> List[Tuple[str, str, str]]:
    """(id, question, answer) records from a JSONL corpus file."""
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "question" not in obj or "answer" not in obj:
                raise ValueError(f"{path}:{lineno + 1}: object must carry 'question' and 'answer'")
            records.append((str(obj.get("id", lineno)), obj["question"], obj["answer"]))
    return records


def build_vocab(token_lists: List[List[str]]) -> Dict[str, int]:
    """Specials first, then tokens by decreasing frequency (ties lexicographic)."""
    counts: Dict[str, int] = {}
    for tokens in token_lists:
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
    vocab = {tok: i for i, tok in enumerate(SPECIALS)}
    for tok in sorted(counts, key=lambda t: (-counts[t], t)):
        vocab[tok] = len(vocab)
    return vocab


def encode(tokens: List[str], vocab: Dict[str, int]) -> List[int]:
    unk = vocab[UNK]
    return [vocab.get(tok, unk) for tok in tokens]
