"""faqfuse: hybrid FAQ retrieval and question matching.

Ranks a fixed collection of question-answer pairs against a user query by
fusing a lexical query-question similarity (Okapi BM25 over an inverted
index of the questions) with a pluggable supervised query-answer relevance
score, optionally refined by majority voting over the top results.  Query
representations for the relevance scorer can be enriched with knowledge
triplets, either loaded from an external knowledge base or mined
unsupervised from the corpus with a PLSA topic model, using soft positions
and a visible matrix.
"""

from .corpus import (
    Corpus,
    QAPair,
    QuestionPair,
    load_corpus,
    load_question_pairs,
    save_corpus,
    split_corpus,
    tokenize,
)
from .bm25 import Bm25Index, Bm25Params, build_index, load_index_bundle, save_index_bundle
from .plsa import PlsaConfig, TopicModel, load_model, log_likelihood, save_model, top_words, train
from .knowledge import (
    InjectedSequence,
    InjectionConfig,
    KnowledgeBase,
    Triplet,
    build_kb,
    inject,
    load_triplets,
    merge,
    save_triplets,
    triplets_from_topics,
)
from .scorer import (
    BaselineScorer,
    RelevanceScorer,
    RemoteScorer,
    ScorerProtocolError,
    ScorerTimeoutError,
    ScorerTransportError,
    baseline_fit,
)
from .ranking import FusionConfig, Pipeline, RankedList, ScoredPair, fuse, match, retrieve, vote
from .metrics import (
    MetricsReport,
    RetrievalResult,
    classification_metrics,
    evaluate_retrieval,
    matching_metrics,
    mrr,
    result_from_ranked_list,
)
from .config import PipelineConfig, assemble_pipeline
from .sweep import sweep_topics

__version__ = "0.1.0"

__all__ = [
    "Bm25Index",
    "Bm25Params",
    "BaselineScorer",
    "Corpus",
    "FusionConfig",
    "InjectedSequence",
    "InjectionConfig",
    "KnowledgeBase",
    "MetricsReport",
    "Pipeline",
    "PipelineConfig",
    "PlsaConfig",
    "QAPair",
    "QuestionPair",
    "RankedList",
    "RelevanceScorer",
    "RemoteScorer",
    "RetrievalResult",
    "ScoredPair",
    "ScorerProtocolError",
    "ScorerTimeoutError",
    "ScorerTransportError",
    "TopicModel",
    "Triplet",
    "assemble_pipeline",
    "baseline_fit",
    "build_index",
    "build_kb",
    "classification_metrics",
    "evaluate_retrieval",
    "fuse",
    "inject",
    "load_corpus",
    "load_index_bundle",
    "load_model",
    "load_question_pairs",
    "load_triplets",
    "log_likelihood",
    "match",
    "matching_metrics",
    "merge",
    "mrr",
    "result_from_ranked_list",
    "retrieve",
    "save_corpus",
    "save_index_bundle",
    "save_model",
    "save_triplets",
    "split_corpus",
    "sweep_topics",
    "tokenize",
    "top_words",
    "train",
    "triplets_from_topics",
    "vote",
]
