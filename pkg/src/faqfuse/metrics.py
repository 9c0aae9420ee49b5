"""Retrieval and matching metrics: accuracy, macro P/R/F1, MRR.

Retrieval metrics treat the chosen answer as a multi-class prediction and
macro-average precision/recall over the classes that occur as gold
answers; a class that is never predicted contributes precision 0.  MRR
ranks deduplicated answers by their best fused score; a query whose gold
answer never appears contributes 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .ranking import RankedList


@dataclass
class RetrievalResult:
    query_id: str
    gold_answer_id: str
    ranked_answer_ids: List[str]        # deduplicated, best fused score first
    chosen_answer_id: str

    def __post_init__(self) -> None:
        if len(set(self.ranked_answer_ids)) != len(self.ranked_answer_ids):
            raise ValueError(f"query {self.query_id!r}: ranking contains duplicate answers")
        if self.chosen_answer_id not in self.ranked_answer_ids:
            raise ValueError(f"query {self.query_id!r}: chosen answer missing from ranking")


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    mrr: Optional[float] = None

    def to_dict(self) -> Dict[str, float]:
        out = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }
        if self.mrr is not None:
            out["mrr"] = self.mrr
        return out


def result_from_ranked_list(query_id: str, gold_answer_id: str, ranked: RankedList) -> RetrievalResult:
    """Collapse a pair ranking to an answer ranking (first occurrence keeps
    the best rank) and pair it with the gold answer."""
    seen = set()
    answers = []
    for entry in ranked.entries:
        if entry.answer_id not in seen:
            seen.add(entry.answer_id)
            answers.append(entry.answer_id)
    return RetrievalResult(
        query_id=query_id,
        gold_answer_id=gold_answer_id,
        ranked_answer_ids=answers,
        chosen_answer_id=ranked.chosen_answer,
    )


def mrr(results: Sequence[RetrievalResult]) -> float:
    """Mean reciprocal rank of the gold answer; absent gold contributes 0."""
    if not results:
        raise ValueError("cannot compute MRR over no results")
    total = 0.0
    for r in results:
        if not r.ranked_answer_ids:
            raise ValueError(f"query {r.query_id!r}: empty ranking")
        try:
            total += 1.0 / (r.ranked_answer_ids.index(r.gold_answer_id) + 1)
        except ValueError:
            pass
    return total / len(results)


def classification_metrics(results: Sequence[RetrievalResult]) -> MetricsReport:
    """Accuracy plus macro precision/recall/F1 over gold-answer classes."""
    if not results:
        raise ValueError("cannot compute metrics over no results")
    classes = sorted({r.gold_answer_id for r in results})
    correct = sum(1 for r in results if r.chosen_answer_id == r.gold_answer_id)
    precisions = []
    recalls = []
    for c in classes:
        tp = sum(1 for r in results if r.gold_answer_id == c and r.chosen_answer_id == c)
        predicted = sum(1 for r in results if r.chosen_answer_id == c)
        actual = sum(1 for r in results if r.gold_answer_id == c)
        precisions.append(tp / predicted if predicted > 0 else 0.0)
        recalls.append(tp / actual)
    precision = sum(precisions) / len(classes)
    recall = sum(recalls) / len(classes)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=correct / len(results),
    )


def evaluate_retrieval(results: Sequence[RetrievalResult]) -> MetricsReport:
    """All five retrieval metrics in one report."""
    report = classification_metrics(results)
    report.mrr = mrr(results)
    return report


def matching_metrics(predictions: Sequence[int], golds: Sequence[int]) -> MetricsReport:
    """Binary precision/recall/F1 on the positive class, plus accuracy."""
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions for {len(golds)} golds")
    if not predictions:
        raise ValueError("cannot compute metrics over no predictions")
    for v in list(predictions) + list(golds):
        if v not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {v!r}")
    tp = sum(1 for p, g in zip(predictions, golds) if p == 1 and g == 1)
    fp = sum(1 for p, g in zip(predictions, golds) if p == 1 and g == 0)
    fn = sum(1 for p, g in zip(predictions, golds) if p == 0 and g == 1)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    accuracy = sum(1 for p, g in zip(predictions, golds) if p == g) / len(predictions)
    return MetricsReport(precision=precision, recall=recall, f1=f1, accuracy=accuracy)
