"""Command-line surface.

Subcommands: index, train-plsa, extract-triplets, query, match, eval,
sweep, serve.  Exit code 0 on success, 1 with a diagnostic on stderr on
failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .bm25 import Bm25Params, build_index, load_index_bundle, save_index_bundle
from .config import assemble_pipeline, load_config
from .corpus import load_corpus, load_question_pairs
from .knowledge import KnowledgeBase, load_triplets, merge, save_triplets, triplets_from_topics
from .metrics import matching_metrics
from .plsa import PlsaConfig, load_model, save_model, train
from .ranking import FusionConfig, Pipeline, match, retrieve
from .scorer import RemoteScorer, baseline_fit
from .service import serve
from .sweep import evaluate_split_queries, sweep_topics, write_sweep_csv, write_sweep_json


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faqfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a BM25 index snapshot from a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--tokenizer", default="char", choices=["char", "unicode-word"])
    p.add_argument("--k1", type=float, default=1.2)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-plsa", help="train a PLSA topic model over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--tokenizer", default="char", choices=["char", "unicode-word"])
    p.add_argument("--topics", type=int, default=10)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract-triplets", help="mine topical triplets from a PLSA model")
    p.add_argument("--model", required=True)
    p.add_argument("--top-l", type=int, default=10)
    p.add_argument("--out", required=True)

    p = sub.add_parser("query", help="retrieve the best answers for a query")
    p.add_argument("--index", required=True, help="index snapshot from `faqfuse index`")
    p.add_argument("--model", help="PLSA model; mines topical triplets for injection")
    p.add_argument("--kb", help="external triplet TSV for injection")
    p.add_argument("--top-l", type=int, default=10, help="topic words per topic when --model is given")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--vote", type=int, default=0, help="vote over the top M results (0 disables)")
    p.add_argument("--scorer", default="baseline", help="baseline | remote:URL | none")
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("text")

    p = sub.add_parser("match", help="score question pairs for intent similarity")
    p.add_argument("--pairs", required=True, help="TSV left<TAB>right<TAB>label")
    p.add_argument("--index", required=True, help="index snapshot (IQF and length statistics)")
    p.add_argument("--kb", help="external triplet TSV for injection")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--scorer", default="baseline", help="baseline | remote:URL | none")
    p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("eval", help="evaluate a pipeline config on a corpus split")
    p.add_argument("--pipeline-config", required=True)
    p.add_argument("--split", default="test", choices=["train", "valid", "test"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="evaluate across PLSA topic counts")
    p.add_argument("--pipeline-config", required=True)
    p.add_argument("--topics", required=True, help="comma-separated topic counts, e.g. 1,5,10,20")
    p.add_argument("--split", default="valid", choices=["train", "valid", "test"])
    p.add_argument("--out", required=True, help=".csv or .json")

    p = sub.add_parser("serve", help="run the HTTP retrieval service")
    p.add_argument("--config", help="pipeline config (falls back to $FAQFUSE_CONFIG)")
    p.add_argument("--collection", default="full", choices=["full", "train"])
    p.add_argument("--bind", default="127.0.0.1:8080")

    return parser


def _require_file(path: str, what: str) -> None:
    if not os.path.exists(path):
        raise FileNotFoundError(f"{what} not found: {path}")


def _scorer_from_flag(flag: str, corpus, alpha: float):
    if flag == "baseline":
        return baseline_fit(corpus)
    if flag == "none":
        if alpha != 1.0:
            raise ValueError("--scorer none is BM25-only and requires --alpha 1.0")
        return None
    if flag.startswith("remote:"):
        return RemoteScorer(flag[len("remote:"):], list(corpus.answers))
    raise ValueError(f"unknown scorer {flag!r} (expected baseline, none, or remote:URL)")


def _query_pipeline(args) -> Pipeline:
    _require_file(args.index, "index")
    index, corpus = load_index_bundle(args.index)
    kb: Optional[KnowledgeBase] = None
    if args.kb:
        _require_file(args.kb, "knowledge base")
        kb = load_triplets(args.kb)
    if args.model:
        _require_file(args.model, "PLSA model")
        topical = triplets_from_topics(load_model(args.model), args.top_l)
        kb = merge(kb, topical) if kb is not None else topical
    fusion = FusionConfig(
        alpha=args.alpha,
        vote_m=args.vote if args.vote > 0 else 5,
        voting_enabled=args.vote > 0,
    )
    scorer = _scorer_from_flag(args.scorer, corpus, args.alpha)
    return Pipeline(corpus=corpus, index=index, scorer=scorer, kb=kb, fusion=fusion)


def _cmd_index(args) -> int:
    _require_file(args.corpus, "corpus")
    corpus = load_corpus(args.corpus, args.format, args.tokenizer)
    index = build_index(corpus, Bm25Params(k1=args.k1, b=args.b))
    save_index_bundle(args.out, index, corpus)
    print(f"indexed {len(corpus)} pairs ({len(index.postings)} terms) -> {args.out}")
    return 0


def _cmd_train_plsa(args) -> int:
    _require_file(args.corpus, "corpus")
    corpus = load_corpus(args.corpus, args.format, args.tokenizer)
    config = PlsaConfig(
        k_topics=args.topics,
        max_iterations=args.iters,
        tolerance=args.tolerance,
        seed=args.seed,
    )
    model = train(corpus, config)
    save_model(model, args.out)
    iters = len(model.iteration_log_likelihoods) - 1
    print(f"trained K={args.topics} in {iters} iterations, "
          f"log-likelihood {model.final_log_likelihood:.4f} -> {args.out}")
    return 0


def _cmd_extract_triplets(args) -> int:
    _require_file(args.model, "PLSA model")
    model = load_model(args.model)
    kb = triplets_from_topics(model, args.top_l)
    save_triplets(kb, args.out)
    print(f"extracted {len(kb)} topical triplets -> {args.out}")
    return 0


def _cmd_query(args) -> int:
    pipeline = _query_pipeline(args)
    ranked = retrieve(pipeline, args.text, top_k=args.top_k)
    payload = {
        "query": args.text,
        "answer": pipeline.corpus.answers[ranked.chosen_answer],
        "vote_applied": ranked.vote_applied,
        "ranked": [
            {
                "question": pipeline.corpus.pairs[e.pair_index].question,
                "answer": pipeline.corpus.answers[e.answer_id],
                "bm25_raw": e.bm25_raw,
                "bm25_norm": e.bm25_norm,
                "relevance": e.relevance,
                "rs": e.rs,
            }
            for e in ranked.entries[: args.top_k]
        ],
    }
    print(json.dumps(payload, ensure_ascii=False, indent=2))
    return 0


def _cmd_match(args) -> int:
    _require_file(args.pairs, "pairs file")
    _require_file(args.index, "index")
    index, corpus = load_index_bundle(args.index)
    kb = load_triplets(args.kb) if args.kb else None
    scorer = _scorer_from_flag(args.scorer, corpus, args.alpha)
    pipeline = Pipeline(
        corpus=corpus, index=index, scorer=scorer, kb=kb,
        fusion=FusionConfig(alpha=args.alpha),
    )
    pairs = load_question_pairs(args.pairs)
    rows = []
    for qp in pairs:
        score, label = match(pipeline, qp.left, qp.right)
        rows.append({"left": qp.left, "right": qp.right, "gold": qp.label, "score": score, "label": label})
    report = {"pairs": rows}
    if pairs:
        metrics = matching_metrics([r["label"] for r in rows], [r["gold"] for r in rows])
        report["metrics"] = metrics.to_dict()
    text = json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval(args) -> int:
    _require_file(args.pipeline_config, "pipeline config")
    config = load_config(args.pipeline_config)
    assembly = assemble_pipeline(config, collection="train")
    queries = assembly.split(args.split).pairs
    if not queries:
        raise ValueError(f"split {args.split!r} is empty under ratios {config.split_ratios}")
    report, _ = evaluate_split_queries(assembly.pipeline, queries)
    payload = {
        "config_fingerprint": config.fingerprint(),
        "split": args.split,
        "n_queries": len(queries),
        "metrics": report.to_dict(),
    }
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, sort_keys=True, indent=2)
        f.write("\n")
    print(f"evaluated {len(queries)} {args.split} queries -> {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    _require_file(args.pipeline_config, "pipeline config")
    config = load_config(args.pipeline_config)
    try:
        k_values = [int(k) for k in args.topics.split(",") if k.strip()]
    except ValueError:
        raise ValueError(f"--topics must be comma-separated integers, got {args.topics!r}")
    rows = sweep_topics(config, k_values, eval_split=args.split)
    if args.out.endswith(".json"):
        write_sweep_json(rows, args.out)
    else:
        write_sweep_csv(rows, args.out)
    failures = sum(1 for r in rows if r.get("error"))
    print(f"swept K in {k_values} ({failures} failures) -> {args.out}")
    return 0


def _cmd_serve(args) -> int:
    config_path = args.config or os.environ.get("FAQFUSE_CONFIG")
    if not config_path:
        raise ValueError("no config given: pass --config or set FAQFUSE_CONFIG")
    _require_file(config_path, "pipeline config")
    config = load_config(config_path)
    assembly = assemble_pipeline(config, collection=args.collection)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--bind must be HOST:PORT, got {args.bind!r}")
    print(f"serving {len(assembly.pipeline.corpus)} pairs on http://{args.bind}")
    serve(assembly.pipeline, host, int(port))
    return 0


_COMMANDS = {
    "index": _cmd_index,
    "train-plsa": _cmd_train_plsa,
    "extract-triplets": _cmd_extract_triplets,
    "query": _cmd_query,
    "match": _cmd_match,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "serve": _cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as e:
        print(f"faqfuse {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
