"""Pipeline configuration: one JSON file describing a full assembly.

The evaluation protocol builds the retrieval collection from the training
split only; validation and test questions act as unseen queries whose
gold answer is the one attached to them (answer ids are content hashes,
so they stay comparable across splits).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .bm25 import Bm25Params, build_index
from .corpus import Corpus, load_corpus, split_corpus
from .knowledge import InjectionConfig, KnowledgeBase, load_triplets, merge, triplets_from_topics
from .plsa import PlsaConfig, TopicModel, train
from .ranking import FusionConfig, Pipeline
from .scorer import DEFAULT_TIMEOUT, RelevanceScorer, RemoteScorer, baseline_fit

CONFIG_VERSION = 1

SCORER_TYPES = ("baseline", "remote", "none")


@dataclass
class ScorerSpec:
    type: str = "baseline"
    url: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self) -> None:
        if self.type not in SCORER_TYPES:
            raise ValueError(f"scorer type must be one of {SCORER_TYPES}, got {self.type!r}")
        if self.type == "remote" and not self.url:
            raise ValueError("remote scorer requires a url")


@dataclass
class KnowledgeSpec:
    external_path: Optional[str] = None
    topical: bool = False
    topical_top_l: int = 10

    def __post_init__(self) -> None:
        if self.topical_top_l < 2:
            raise ValueError(f"topical_top_l must be >= 2, got {self.topical_top_l}")


@dataclass
class PipelineConfig:
    corpus_path: str
    corpus_format: str = "jsonl"
    tokenizer_mode: str = "char"
    bm25: Bm25Params = field(default_factory=Bm25Params)
    plsa: PlsaConfig = field(default_factory=PlsaConfig)
    knowledge: KnowledgeSpec = field(default_factory=KnowledgeSpec)
    injection: InjectionConfig = field(default_factory=InjectionConfig)
    scorer: ScorerSpec = field(default_factory=ScorerSpec)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    split_ratios: Tuple[float, float, float] = (0.68, 0.20, 0.12)
    split_seed: int = 13

    def to_dict(self) -> dict:
        return {
            "version": CONFIG_VERSION,
            "corpus": {
                "path": self.corpus_path,
                "format": self.corpus_format,
                "tokenizer": self.tokenizer_mode,
            },
            "bm25": {"k1": self.bm25.k1, "b": self.bm25.b},
            "plsa": {
                "k_topics": self.plsa.k_topics,
                "max_iterations": self.plsa.max_iterations,
                "tolerance": self.plsa.tolerance,
                "seed": self.plsa.seed,
                "smoothing_epsilon": self.plsa.smoothing_epsilon,
            },
            "knowledge": {
                "external_path": self.knowledge.external_path,
                "topical": self.knowledge.topical,
                "topical_top_l": self.knowledge.topical_top_l,
            },
            "injection": {
                "max_triplets_per_token": self.injection.max_triplets_per_token,
                "max_sequence_length": self.injection.max_sequence_length,
                "selection_rule": self.injection.selection_rule,
            },
            "scorer": {"type": self.scorer.type, "url": self.scorer.url, "timeout": self.scorer.timeout},
            "fusion": {
                "alpha": self.fusion.alpha,
                "vote_m": self.fusion.vote_m,
                "voting_enabled": self.fusion.voting_enabled,
            },
            "split": {"ratios": list(self.split_ratios), "seed": self.split_seed},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        version = d.get("version")
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {version!r} (expected {CONFIG_VERSION})")
        corpus = d["corpus"]
        return cls(
            corpus_path=corpus["path"],
            corpus_format=corpus.get("format", "jsonl"),
            tokenizer_mode=corpus.get("tokenizer", "char"),
            bm25=Bm25Params(**d.get("bm25", {})),
            plsa=PlsaConfig(**d.get("plsa", {})),
            knowledge=KnowledgeSpec(**d.get("knowledge", {})),
            injection=InjectionConfig(**d.get("injection", {})),
            scorer=ScorerSpec(**d.get("scorer", {})),
            fusion=FusionConfig(**d.get("fusion", {})),
            split_ratios=tuple(d.get("split", {}).get("ratios", (0.68, 0.20, 0.12))),
            split_seed=d.get("split", {}).get("seed", 13),
        )

    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def load_config(path: str) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as f:
        d = json.load(f)
    config = PipelineConfig.from_dict(d)
    if not os.path.exists(config.corpus_path):
        raise FileNotFoundError(f"corpus file not found: {config.corpus_path}")
    ext = config.knowledge.external_path
    if ext is not None and not os.path.exists(ext):
        raise FileNotFoundError(f"knowledge base file not found: {ext}")
    return config


def save_config(config: PipelineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, ensure_ascii=False, sort_keys=True, indent=2)
        f.write("\n")


@dataclass
class Assembly:
    pipeline: Pipeline
    full: Corpus
    train: Corpus
    valid: Corpus
    test: Corpus
    topic_model: Optional[TopicModel]
    kb: Optional[KnowledgeBase]
    config: PipelineConfig

    def split(self, name: str) -> Corpus:
        got = {"full": self.full, "train": self.train, "valid": self.valid, "test": self.test}.get(name)
        if got is None:
            raise ValueError(f"unknown split {name!r}")
        return got


def _build_scorer(spec: ScorerSpec, collection: Corpus) -> Optional[RelevanceScorer]:
    if spec.type == "baseline":
        return baseline_fit(collection)
    if spec.type == "remote":
        return RemoteScorer(spec.url, list(collection.answers), timeout=spec.timeout)
    return None


def assemble_pipeline(config: PipelineConfig, collection: str = "train") -> Assembly:
    """Build the full pipeline described by a config.

    `collection` picks the corpus the pipeline retrieves over: "train"
    (default, the evaluation protocol) or "full" (serve everything).
    PLSA and the baseline scorer are always fit on that same collection.
    """
    if collection not in ("train", "full"):
        raise ValueError(f"collection must be 'train' or 'full', got {collection!r}")
    full = load_corpus(config.corpus_path, config.corpus_format, config.tokenizer_mode)
    train_c, valid_c, test_c = split_corpus(full, config.split_ratios, config.split_seed)
    target = train_c if collection == "train" else full

    index = build_index(target, config.bm25)

    topic_model: Optional[TopicModel] = None
    kb: Optional[KnowledgeBase] = None
    if config.knowledge.external_path is not None:
        kb = load_triplets(config.knowledge.external_path)
    if config.knowledge.topical:
        topic_model = train(target, config.plsa)
        topical = triplets_from_topics(topic_model, config.knowledge.topical_top_l)
        kb = merge(kb, topical) if kb is not None else topical

    scorer = _build_scorer(config.scorer, target)
    pipeline = Pipeline(
        corpus=target,
        index=index,
        scorer=scorer,
        kb=kb,
        fusion=config.fusion,
        injection=config.injection,
    )
    return Assembly(
        pipeline=pipeline,
        full=full,
        train=train_c,
        valid=valid_c,
        test=test_c,
        topic_model=topic_model,
        kb=kb,
        config=config,
    )
