"""Fine-tuning loops.

FAQ mode maximizes the posterior of each pair's own answer given its
question (cross-entropy over distinct answers).  Match mode has no
labeled pairs in a Q-A collection, so they are synthesized: two questions
sharing an answer are a positive pair, otherwise negative, balanced and
seeded.  Per-epoch mean training loss is recorded and saved with the
checkpoint.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch
import torch.nn as nn

from .model import ModelConfig, ScorerModel
from .text import answer_identity, build_vocab, encode, load_corpus_jsonl, tokenize, PAD


@dataclass
class TrainConfig:
    epochs: int = 5
    batch_size: int = 16
    learning_rate: float = 1e-3
    seed: int = 0
    max_match_pairs: int = 400


def _pad_batch(sequences: List[List[int]], pad_id: int) -> Tuple[torch.Tensor, torch.Tensor]:
    width = max(len(s) for s in sequences)
    ids = torch.full((len(sequences), width), pad_id, dtype=torch.long)
    pos = torch.zeros((len(sequences), width), dtype=torch.long)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        pos[i, : len(seq)] = torch.arange(len(seq))
    return ids, pos


def _epochs(model: ScorerModel, examples, loss_of, train_config: TrainConfig) -> List[float]:
    rng = random.Random(train_config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate)
    losses: List[float] = []
    order = list(range(len(examples)))
    model.train()
    for _ in range(train_config.epochs):
        rng.shuffle(order)
        total, count = 0.0, 0
        for start in range(0, len(order), train_config.batch_size):
            batch = [examples[i] for i in order[start : start + train_config.batch_size]]
            optimizer.zero_grad()
            loss = loss_of(batch)
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
            count += len(batch)
        losses.append(total / count)
    model.eval()
    return losses


def _synthesize_match_pairs(records, rng: random.Random, limit: int):
    by_answer = {}
    for _, question, answer in records:
        by_answer.setdefault(answer_identity(answer), []).append(question)
    answer_ids = list(by_answer)
    shared = [a for a in answer_ids if len(by_answer[a]) >= 2]
    can_positive = bool(shared)
    can_negative = len(answer_ids) >= 2
    if not (can_positive or can_negative):
        raise ValueError("corpus yields no match pairs (one answer, one question)")
    pairs = []
    while len(pairs) < limit:
        positive = can_positive and (not can_negative or rng.random() < 0.5)
        if positive:
            left, right = rng.sample(by_answer[rng.choice(shared)], 2)
            pairs.append((left, right, 1))
        else:
            a1, a2 = rng.sample(answer_ids, 2)
            pairs.append((rng.choice(by_answer[a1]), rng.choice(by_answer[a2]), 0))
    return pairs


def finetune(
    corpus_path: str,
    mode: str = "faq",
    model_config: Optional[ModelConfig] = None,
    train_config: Optional[TrainConfig] = None,
) -> Tuple[ScorerModel, List[float]]:
    """Train a scorer on a JSONL corpus; returns (model, per-epoch losses)."""
    model_config = model_config or ModelConfig()
    train_config = train_config or TrainConfig()
    records = load_corpus_jsonl(corpus_path)
    if not records:
        raise ValueError(f"{corpus_path}: empty corpus")
    torch.manual_seed(train_config.seed)

    questions = [tokenize(q) for _, q, _ in records]
    answers = [tokenize(a) for _, _, a in records]
    vocab = build_vocab(questions + answers)
    pad_id = vocab[PAD]

    if mode == "faq":
        classes: List[str] = []
        class_of = {}
        labels = []
        for _, _, answer in records:
            aid = answer_identity(answer)
            if aid not in class_of:
                class_of[aid] = len(classes)
                classes.append(aid)
            labels.append(class_of[aid])
        model = ScorerModel(model_config, vocab, "faq", classes)
        encoded = [encode(q, vocab) for q in questions]
        examples = list(zip(encoded, labels))
        ce = nn.CrossEntropyLoss()

        def loss_of(batch):
            ids, pos = _pad_batch([seq for seq, _ in batch], pad_id)
            target = torch.tensor([label for _, label in batch], dtype=torch.long)
            logits = model.head(model.forward(ids, pos))
            return ce(logits, target)

    elif mode == "match":
        rng = random.Random(train_config.seed)
        pairs = _synthesize_match_pairs(records, rng, train_config.max_match_pairs)
        model = ScorerModel(model_config, vocab, "match")
        sep_id = vocab["<sep>"]
        examples = []
        for left, right, label in pairs:
            seq = encode(tokenize(left), vocab) + [sep_id] + encode(tokenize(right), vocab)
            examples.append((seq, label))
        bce = nn.BCEWithLogitsLoss()

        def loss_of(batch):
            ids, pos = _pad_batch([seq for seq, _ in batch], pad_id)
            target = torch.tensor([float(label) for _, label in batch])
            logits = model.head(model.forward(ids, pos))[:, 0]
            return bce(logits, target)

    else:
        raise ValueError(f"mode must be 'faq' or 'match', got {mode!r}")

    losses = _epochs(model, examples, loss_of, train_config)
    return model, losses
