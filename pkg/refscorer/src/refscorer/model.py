"""Compact transformer relevance scorer.

FAQ mode stacks a linear answer-classification head on the pooled encoder
output and returns the softmax posterior over distinct answers; match
mode encodes "left <sep> right" and returns one sigmoid similarity.

Injected sequences plug in at two points: soft positions index the
position-embedding table, and the visible matrix becomes an additive
attention mask (0 where visible, -inf where not), so a request without
injection and one with an all-visible trunk-only injection run the same
computation.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import torch
import torch.nn as nn

from .text import PAD, SEP, UNK, encode, tokenize


@dataclass
class ModelConfig:
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    ff_dim: int = 128
    max_positions: int = 256
    encoder_tag: str = "refscorer-tiny-v1"

    def fingerprint(self) -> str:
        canon = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


NEG_INF = float("-inf")


def mask_from_visible(visible: List[List[int]]) -> torch.Tensor:
    """Additive attention mask: 0 where visible, -inf where not."""
    v = torch.as_tensor(visible, dtype=torch.bool)
    mask = torch.zeros(v.shape, dtype=torch.float32)
    mask[~v] = NEG_INF
    return mask


class ScorerModel(nn.Module):
    def __init__(self, config: ModelConfig, vocab: Dict[str, int], mode: str,
                 classes: Optional[List[str]] = None):
        super().__init__()
        if mode not in ("faq", "match"):
            raise ValueError(f"mode must be 'faq' or 'match', got {mode!r}")
        if mode == "faq" and not classes:
            raise ValueError("faq mode needs the distinct answer ids as classes")
        self.config = config
        self.vocab = vocab
        self.mode = mode
        self.classes = list(classes) if classes else []
        self.class_index = {c: i for i, c in enumerate(self.classes)}

        self.token_emb = nn.Embedding(len(vocab), config.d_model, padding_idx=vocab[PAD])
        self.pos_emb = nn.Embedding(config.max_positions, config.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=config.d_model, nhead=config.n_heads, dim_feedforward=config.ff_dim,
            dropout=0.0, batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.n_layers,
                                             enable_nested_tensor=False)
        if mode == "faq":
            self.head = nn.Linear(config.d_model, len(self.classes))
        else:
            self.head = nn.Linear(config.d_model, 1)

    def _pool(self, hidden: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        keep = (~pad_mask).unsqueeze(-1).float()
        return (hidden * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)

    def forward(self, token_ids: torch.Tensor, positions: torch.Tensor,
                attn_mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        """Pooled sequence representation.

        token_ids, positions: (B, L); attn_mask: (L, L) additive float for
        a single unpadded sequence (the serving path), or None for padded
        batches (the training path), where padding comes from token_ids.
        """
        pad_mask = token_ids == self.vocab[PAD]
        x = self.token_emb(token_ids) + self.pos_emb(positions.clamp(max=self.config.max_positions - 1))
        if attn_mask is not None:
            hidden = self.encoder(x, mask=attn_mask)
        else:
            hidden = self.encoder(x, src_key_padding_mask=pad_mask)
        return self._pool(hidden, pad_mask)

    # ----- inference over wire-protocol inputs -----

    def _sequence_inputs(self, text: str, injected: Optional[dict]):
        if injected is not None:
            tokens = list(injected["tokens"])
            positions = list(injected["soft_positions"])
            mask = mask_from_visible(injected["visible"])
            trunk = [bool(m) for m in injected["trunk_mask"]]
        else:
            tokens = tokenize(text)
            positions = list(range(len(tokens)))
            mask = torch.zeros((len(tokens), len(tokens)), dtype=torch.float32)
            trunk = [True] * len(tokens)
        if not tokens:
            tokens, positions = [UNK], [0]
            mask = torch.zeros((1, 1), dtype=torch.float32)
            trunk = [True]
        return tokens, positions, mask, trunk

    @torch.no_grad()
    def class_posterior(self, query: str, injected: Optional[dict] = None) -> torch.Tensor:
        self.eval()
        tokens, positions, mask, _ = self._sequence_inputs(query, injected)
        ids = torch.tensor([encode(tokens, self.vocab)], dtype=torch.long)
        pos = torch.tensor([positions], dtype=torch.long)
        pooled = self.forward(ids, pos, attn_mask=mask)
        return torch.softmax(self.head(pooled)[0], dim=-1)

    def score_answers(self, query: str, answer_ids: List[str],
                      injected: Optional[dict] = None) -> Dict[str, float]:
        """Posterior over the requested answer ids.

        Ids the head does not know get probability 0; the rest is
        renormalized over the request (uniform if nothing is known).
        """
        posterior = self.class_posterior(query, injected)
        probs = {aid: float(posterior[self.class_index[aid]]) if aid in self.class_index else 0.0
                 for aid in answer_ids}
        total = sum(probs.values())
        if total <= 0.0:
            return {aid: 1.0 / len(answer_ids) for aid in answer_ids}
        return {aid: p / total for aid, p in probs.items()}

    @staticmethod
    def _combine_pair(left, right):
        """Join two (tokens, positions, mask, trunk) triples around <sep>.

        Trunk tokens of both sides and the separator see each other;
        branch tokens keep their within-side visibility and stay hidden
        from the other side entirely.
        """
        l_tokens, l_pos, l_mask, l_trunk = left
        r_tokens, r_pos, r_mask, r_trunk = right
        sep_pos = max(l_pos) + 1
        tokens = l_tokens + [SEP] + [*r_tokens]
        positions = l_pos + [sep_pos] + [p + sep_pos + 1 for p in r_pos]
        trunk = l_trunk + [True] + r_trunk
        n_l, n_r = len(l_tokens), len(r_tokens)
        n = n_l + 1 + n_r
        mask = torch.full((n, n), NEG_INF)
        mask[:n_l, :n_l] = l_mask
        mask[n_l + 1:, n_l + 1:] = r_mask
        trunk_t = torch.tensor(trunk, dtype=torch.bool)
        cross = trunk_t.unsqueeze(0) & trunk_t.unsqueeze(1)
        mask[cross] = 0.0
        mask.fill_diagonal_(0.0)
        return tokens, positions, mask

    @torch.no_grad()
    def similarity(self, left: str, right: str,
                   injected_left: Optional[dict] = None,
                   injected_right: Optional[dict] = None) -> float:
        self.eval()
        tokens, positions, mask = self._combine_pair(
            self._sequence_inputs(left, injected_left),
            self._sequence_inputs(right, injected_right))
        ids = torch.tensor([encode(tokens, self.vocab)], dtype=torch.long)
        pos = torch.tensor([positions], dtype=torch.long)
        pooled = self.forward(ids, pos, attn_mask=mask)
        return float(torch.sigmoid(self.head(pooled)[0, 0]))

    # ----- checkpointing -----

    def save(self, directory: str, losses: Optional[List[float]] = None) -> None:
        os.makedirs(directory, exist_ok=True)
        meta = {
            "config": asdict(self.config),
            "fingerprint": self.config.fingerprint(),
            "mode": self.mode,
            "vocab": self.vocab,
            "classes": self.classes,
            "losses": losses or [],
        }
        with open(os.path.join(directory, "config.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, ensure_ascii=False, sort_keys=True, indent=2)
        torch.save(self.state_dict(), os.path.join(directory, "weights.pt"))


def load_checkpoint(directory: str) -> ScorerModel:
    with open(os.path.join(directory, "config.json"), "r", encoding="utf-8") as f:
        meta = json.load(f)
    model = ScorerModel(
        config=ModelConfig(**meta["config"]),
        vocab={k: int(v) for k, v in meta["vocab"].items()},
        mode=meta["mode"],
        classes=meta["classes"] or None,
    )
    model.load_state_dict(torch.load(os.path.join(directory, "weights.pt"), weights_only=True))
    model.eval()
    return model
