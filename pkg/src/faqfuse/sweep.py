"""Topic-count sweep: retrieval quality as a function of PLSA topics.

For each K the sweep trains a fresh topic model on the training split
(shared seed), mines topical triplets, assembles the pipeline, and scores
the validation queries.  Failures for one K are recorded and the sweep
continues.
"""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from typing import List, Sequence

from .config import PipelineConfig, assemble_pipeline
from .corpus import QAPair
from .metrics import MetricsReport, RetrievalResult, evaluate_retrieval, result_from_ranked_list
from .ranking import Pipeline, retrieve


def evaluate_split_queries(
    pipeline: Pipeline,
    queries: Sequence[QAPair],
) -> tuple[MetricsReport, List[RetrievalResult]]:
    """Run every pair's question as a query against the pipeline; the gold
    answer is the pair's own."""
    results = []
    for pair in queries:
        ranked = retrieve(pipeline, pair.question)
        results.append(result_from_ranked_list(pair.id, pair.answer_id, ranked))
    return evaluate_retrieval(results), results


def sweep_topics(
    config: PipelineConfig,
    k_values: Sequence[int],
    eval_split: str = "valid",
) -> List[dict]:
    """One metrics row per topic count K; errors become marked rows."""
    if not k_values:
        raise ValueError("k_values must be non-empty")
    rows: List[dict] = []
    for k in k_values:
        row: dict = {"k_topics": int(k)}
        try:
            cfg_k = replace(
                config,
                plsa=replace(config.plsa, k_topics=int(k)),
                knowledge=replace(config.knowledge, topical=True),
            )
            assembly = assemble_pipeline(cfg_k, collection="train")
            report, _ = evaluate_split_queries(assembly.pipeline, assembly.split(eval_split).pairs)
            row.update(report.to_dict())
            row["error"] = None
        except Exception as e:  # keep sweeping the remaining K values
            row["error"] = f"{type(e).__name__}: {e}"
        rows.append(row)
    return rows


_FIELDS = ["k_topics", "precision", "recall", "f1", "accuracy", "mrr", "error"]


def write_sweep_csv(rows: List[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in _FIELDS})


def write_sweep_json(rows: List[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, ensure_ascii=False, sort_keys=True, indent=2)
        f.write("\n")
