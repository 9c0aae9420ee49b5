"""refscorer: reference neural backend for the faqfuse /score protocol.

A compact transformer encoder with an answer-classification head (FAQ
mode) or a sigmoid similarity head (match mode).  Injected sequences,
when a request carries them, are consumed the knowledge-aware way: soft
positions become position-embedding indices and the visible matrix
becomes an additive attention mask.
"""

from .model import ModelConfig, ScorerModel, load_checkpoint
from .text import answer_identity, load_corpus_jsonl, tokenize
from .train import finetune

__version__ = "0.1.0"

__all__ = [
    "ModelConfig",
    "ScorerModel",
    "answer_identity",
    "finetune",
    "load_checkpoint",
    "load_corpus_jsonl",
    "tokenize",
]
