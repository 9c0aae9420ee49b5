"""Knowledge triplets and query injection.

Triplets (head, relation, tail) come from an external knowledge base file
or are mined from PLSA topics: the top-L words of each topic are linked
pairwise, both directions, under a per-topic relation label.

`inject` grafts matching triplets onto a tokenized query as branches: the
relation and tail tokens are appended right after the anchoring query
token, take soft positions continuing from the anchor's, and are hidden
from everything except the anchor and their own branch via the visible
matrix.  Downstream encoders consume the soft positions as position ids
and the visible matrix as an attention mask.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .plsa import TopicModel, top_words

SELECTION_RULES = ("relation-tail",)


@dataclass(frozen=True, order=True)
class Triplet:
    head: str
    relation: str
    tail: str

    def __post_init__(self) -> None:
        if not (self.head and self.relation and self.tail):
            raise ValueError(f"triplet fields must be non-empty: {self!r}")


@dataclass
class KnowledgeBase:
    triplets: frozenset
    by_head: Dict[str, List[Triplet]]
    source_tag: str  # external | topical | merged

    def __len__(self) -> int:
        return len(self.triplets)

    def lookup(self, head: str) -> List[Triplet]:
        """Triplets anchored at a head token, in selection order."""
        return self.by_head.get(head, [])


def _build_kb(triplets, source_tag: str) -> KnowledgeBase:
    dedup = frozenset(triplets)
    by_head: Dict[str, List[Triplet]] = {}
    for t in sorted(dedup, key=lambda t: (t.relation, t.tail)):
        by_head.setdefault(t.head, []).append(t)
    return KnowledgeBase(triplets=dedup, by_head=by_head, source_tag=source_tag)


def build_kb(triplets: Sequence[Triplet], source_tag: str = "external") -> KnowledgeBase:
    """KnowledgeBase from in-memory triplets; duplicates collapse."""
    return _build_kb(triplets, source_tag)


def empty_kb(source_tag: str = "external") -> KnowledgeBase:
    return _build_kb([], source_tag)


def load_triplets(path: str) -> KnowledgeBase:
    """TSV head<TAB>relation<TAB>tail, no header; duplicates collapse."""
    triplets = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            parts = stripped.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno + 1}: expected head<TAB>relation<TAB>tail")
            try:
                triplets.append(Triplet(*parts))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno + 1}: {e}") from e
    return _build_kb(triplets, "external")


def save_triplets(kb: KnowledgeBase, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in sorted(kb.triplets):
            f.write(f"{t.head}\t{t.relation}\t{t.tail}\n")


def triplets_from_topics(model: TopicModel, top_l: int) -> KnowledgeBase:
    """Symmetric topically-relevant triplets from each topic's top words.

    For topic k, every unordered pair (w_i, w_j) of its top_l words yields
    (w_i, relevance_T{k+1}, w_j) and the reverse, so the result holds
    exactly K * top_l * (top_l - 1) triplets.
    """
    if top_l < 2:
        raise ValueError(f"top_l must be >= 2, got {top_l}")
    triplets = []
    for k in range(model.k_topics):
        words = top_words(model, k, top_l)
        relation = f"relevance_T{k + 1}"
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                triplets.append(Triplet(words[i], relation, words[j]))
                triplets.append(Triplet(words[j], relation, words[i]))
    return _build_kb(triplets, "topical")


def merge(a: KnowledgeBase, b: KnowledgeBase) -> KnowledgeBase:
    return _build_kb(a.triplets | b.triplets, "merged")


@dataclass
class InjectionConfig:
    max_triplets_per_token: int = 2
    max_sequence_length: int = 128
    selection_rule: str = "relation-tail"

    def __post_init__(self) -> None:
        if self.max_triplets_per_token < 1:
            raise ValueError("max_triplets_per_token must be >= 1")
        if self.max_sequence_length < 1:
            raise ValueError("max_sequence_length must be >= 1")
        if self.selection_rule not in SELECTION_RULES:
            raise ValueError(f"unknown selection rule {self.selection_rule!r}")


@dataclass
class InjectedSequence:
    tokens: List[str]
    soft_positions: List[int]
    visible: np.ndarray                 # bool, |tokens| x |tokens|, symmetric
    trunk_mask: List[bool]              # True for original query tokens
    truncated: bool = False             # trunk did not fit max_sequence_length

    def __len__(self) -> int:
        return len(self.tokens)


def inject(
    query_tokens: Sequence[str],
    kb: Optional[KnowledgeBase],
    config: InjectionConfig | None = None,
) -> InjectedSequence:
    """Graft knowledge branches onto a query.

    Trunk tokens are never dropped for branches; if the trunk alone
    exceeds the budget it is truncated from the right and the result is
    flagged.  Branches are added greedily left to right, at most
    max_triplets_per_token per anchor, in (relation, tail) order, until
    the next branch would exceed max_sequence_length.
    """
    if not query_tokens:
        raise ValueError("query_tokens must be non-empty")
    config = config or InjectionConfig()

    trunk = list(query_tokens)
    truncated = False
    if len(trunk) > config.max_sequence_length:
        trunk = trunk[: config.max_sequence_length]
        truncated = True

    # plan branches: (anchor trunk position, triplet), in emission order
    branches: List[tuple] = []
    budget = config.max_sequence_length - len(trunk)
    if kb is not None and len(kb) > 0:
        done = False
        for i, tok in enumerate(trunk):
            if done:
                break
            for triplet in kb.lookup(tok)[: config.max_triplets_per_token]:
                if budget < 2:
                    done = True
                    break
                branches.append((i, triplet))
                budget -= 2

    by_anchor: Dict[int, List[Triplet]] = {}
    for i, triplet in branches:
        by_anchor.setdefault(i, []).append(triplet)

    tokens: List[str] = []
    soft_positions: List[int] = []
    trunk_mask: List[bool] = []
    group: List[int] = []               # -1 for trunk, branch id otherwise
    anchor_of: Dict[int, int] = {}      # branch id -> anchor trunk soft position
    branch_id = 0
    for i, tok in enumerate(trunk):
        tokens.append(tok)
        soft_positions.append(i)
        trunk_mask.append(True)
        group.append(-1)
        for triplet in by_anchor.get(i, []):
            anchor_of[branch_id] = i
            for offset, branch_tok in enumerate((triplet.relation, triplet.tail)):
                tokens.append(branch_tok)
                soft_positions.append(i + 1 + offset)
                trunk_mask.append(False)
                group.append(branch_id)
            branch_id += 1

    size = len(tokens)
    visible = np.zeros((size, size), dtype=bool)
    trunk_positions = {}  # trunk soft position -> emitted index
    for idx in range(size):
        if group[idx] == -1:
            trunk_positions[soft_positions[idx]] = idx
    for a in range(size):
        for b in range(size):
            if a == b or (group[a] == -1 and group[b] == -1) or (group[a] == group[b]):
                visible[a, b] = True
    for bid, anchor_pos in anchor_of.items():
        anchor_idx = trunk_positions[anchor_pos]
        for idx in range(size):
            if group[idx] == bid:
                visible[anchor_idx, idx] = True
                visible[idx, anchor_idx] = True

    return InjectedSequence(
        tokens=tokens,
        soft_positions=soft_positions,
        visible=visible,
        trunk_mask=trunk_mask,
        truncated=truncated,
    )


def injected_to_dict(seq: InjectedSequence) -> dict:
    """Wire form: visible as row-major 0/1 arrays."""
    return {
        "tokens": list(seq.tokens),
        "soft_positions": list(seq.soft_positions),
        "visible": seq.visible.astype(int).tolist(),
        "trunk_mask": [bool(m) for m in seq.trunk_mask],
    }


def injected_from_dict(d: dict) -> InjectedSequence:
    return InjectedSequence(
        tokens=list(d["tokens"]),
        soft_positions=list(d["soft_positions"]),
        visible=np.array(d["visible"], dtype=bool),
        trunk_mask=[bool(m) for m in d["trunk_mask"]],
        truncated=bool(d.get("truncated", False)),
    )


def injected_to_json(seq: InjectedSequence) -> str:
    return json.dumps(injected_to_dict(seq), ensure_ascii=False)
