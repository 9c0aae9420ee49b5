import json
import pathlib
import threading

import pytest
import requests

from faqfuse.cli import main
from faqfuse.config import KnowledgeSpec, PipelineConfig, ScorerSpec, assemble_pipeline, load_config, save_config
from faqfuse.plsa import PlsaConfig
from faqfuse.ranking import FusionConfig, match, retrieve
from faqfuse.service import create_server

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def write_fixture_corpus(tmp_path) -> str:
    src = (FIXTURES / "toy_corpus.jsonl").read_text(encoding="utf-8")
    path = tmp_path / "corpus.jsonl"
    path.write_text(src, encoding="utf-8")
    return str(path)


def make_config(tmp_path, **overrides) -> PipelineConfig:
    config = PipelineConfig(
        corpus_path=write_fixture_corpus(tmp_path),
        tokenizer_mode="unicode-word",
        plsa=PlsaConfig(k_topics=2, max_iterations=30, seed=5),
        knowledge=KnowledgeSpec(topical=True, topical_top_l=3),
        split_ratios=(0.6, 0.2, 0.2),
        split_seed=9,
    )
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


class TestConfig:
    def test_round_trip(self, tmp_path):
        config = make_config(tmp_path)
        path = tmp_path / "config.json"
        save_config(config, str(path))
        loaded = load_config(str(path))
        assert loaded.to_dict() == config.to_dict()
        assert loaded.fingerprint() == config.fingerprint()

    def test_version_checked(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"version": 99, "corpus": {"path": "x"}}', encoding="utf-8")
        with pytest.raises(ValueError, match="version"):
            load_config(str(path))

    def test_missing_corpus_file_rejected(self, tmp_path):
        config = make_config(tmp_path)
        config.corpus_path = str(tmp_path / "nope.jsonl")
        path = tmp_path / "config.json"
        save_config(config, str(path))
        with pytest.raises(FileNotFoundError):
            load_config(str(path))

    def test_fingerprint_tracks_content(self, tmp_path):
        a = make_config(tmp_path)
        b = make_config(tmp_path, fusion=FusionConfig(alpha=0.9))
        assert a.fingerprint() != b.fingerprint()

    def test_remote_scorer_requires_url(self):
        with pytest.raises(ValueError, match="url"):
            ScorerSpec(type="remote")


class TestAssembly:
    def test_train_collection_and_topical_kb(self, tmp_path):
        assembly = assemble_pipeline(make_config(tmp_path), collection="train")
        assert len(assembly.train) == 30
        assert len(assembly.valid) == 10
        assert len(assembly.test) == 10
        assert len(assembly.pipeline.corpus) == 30
        assert assembly.topic_model is not None
        assert assembly.kb is not None and len(assembly.kb) == 2 * 3 * 2
        ranked = retrieve(assembly.pipeline, assembly.train.pairs[0].question)
        assert ranked.chosen_answer in assembly.pipeline.corpus.answers

    def test_full_collection(self, tmp_path):
        assembly = assemble_pipeline(make_config(tmp_path), collection="full")
        assert len(assembly.pipeline.corpus) == 50


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCli:
    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["index", "--nonsense"])
        assert exc.value.code == 2

    def test_missing_index_file_diagnostic(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "query", "--index", str(tmp_path / "gone.json"), "any text")
        assert code == 1
        assert "index not found" in err

    def test_index_then_query(self, capsys, tmp_path):
        corpus = write_fixture_corpus(tmp_path)
        index_path = str(tmp_path / "index.json")
        code, out, _ = run_cli(capsys, "index", "--corpus", corpus, "--tokenizer", "unicode-word",
                               "--out", index_path)
        assert code == 0 and "50 pairs" in out
        code, out, _ = run_cli(capsys, "query", "--index", index_path, "--alpha", "1.0",
                               "--scorer", "none", "--top-k", "3",
                               "how do i deadline receipt 0")
        assert code == 0
        payload = json.loads(out)
        assert payload["answer"].startswith("pay at the tax office")
        assert len(payload["ranked"]) == 3
        assert {"bm25_norm", "relevance", "rs"} <= set(payload["ranked"][0])

    def test_query_with_voting_and_baseline(self, capsys, tmp_path):
        corpus = write_fixture_corpus(tmp_path)
        index_path = str(tmp_path / "index.json")
        run_cli(capsys, "index", "--corpus", corpus, "--tokenizer", "unicode-word", "--out", index_path)
        code, out, _ = run_cli(capsys, "query", "--index", index_path, "--vote", "5",
                               "how do i renew my library card")
        assert code == 0
        assert json.loads(out)["vote_applied"] is True

    def test_full_chain_and_report(self, capsys, tmp_path):
        corpus = write_fixture_corpus(tmp_path)
        index_path = str(tmp_path / "index.json")
        model_path = str(tmp_path / "plsa.json")
        kb_path = str(tmp_path / "topical.tsv")
        config_path = str(tmp_path / "config.json")
        report_path = str(tmp_path / "report.json")

        assert run_cli(capsys, "index", "--corpus", corpus, "--tokenizer", "unicode-word",
                       "--out", index_path)[0] == 0
        assert run_cli(capsys, "train-plsa", "--corpus", corpus, "--tokenizer", "unicode-word",
                       "--topics", "2", "--iters", "30", "--seed", "5", "--out", model_path)[0] == 0
        assert run_cli(capsys, "extract-triplets", "--model", model_path, "--top-l", "3",
                       "--out", kb_path)[0] == 0
        assert len(open(kb_path, encoding="utf-8").read().splitlines()) == 2 * 3 * 2

        save_config(make_config(tmp_path), config_path)
        assert run_cli(capsys, "eval", "--pipeline-config", config_path, "--split", "test",
                       "--out", report_path)[0] == 0
        report = json.loads(open(report_path, encoding="utf-8").read())
        assert set(report["metrics"]) == {"precision", "recall", "f1", "accuracy", "mrr"}
        assert report["n_queries"] == 10
        assert report["config_fingerprint"]

    def test_rerun_is_byte_identical(self, capsys, tmp_path):
        corpus = write_fixture_corpus(tmp_path)
        config_path = str(tmp_path / "config.json")
        save_config(make_config(tmp_path), config_path)

        artifacts = {}
        for run in ("one", "two"):
            out_dir = tmp_path / run
            out_dir.mkdir()
            index_path = str(out_dir / "index.json")
            model_path = str(out_dir / "plsa.json")
            kb_path = str(out_dir / "topical.tsv")
            report_path = str(out_dir / "report.json")
            assert run_cli(capsys, "index", "--corpus", corpus, "--tokenizer", "unicode-word",
                           "--out", index_path)[0] == 0
            assert run_cli(capsys, "train-plsa", "--corpus", corpus, "--tokenizer", "unicode-word",
                           "--topics", "2", "--iters", "30", "--seed", "5", "--out", model_path)[0] == 0
            assert run_cli(capsys, "extract-triplets", "--model", model_path, "--top-l", "3",
                           "--out", kb_path)[0] == 0
            assert run_cli(capsys, "eval", "--pipeline-config", config_path, "--split", "valid",
                           "--out", report_path)[0] == 0
            artifacts[run] = [pathlib.Path(p).read_bytes()
                              for p in (index_path, model_path, kb_path, report_path)]
        assert artifacts["one"] == artifacts["two"]

    def test_match_command(self, capsys, tmp_path):
        corpus = write_fixture_corpus(tmp_path)
        index_path = str(tmp_path / "index.json")
        pairs_path = tmp_path / "pairs.tsv"
        pairs_path.write_text(
            "how do i pay the tax\thow can i pay the tax\t1\n"
            "how do i pay the tax\twhere is the metro station\t0\n",
            encoding="utf-8")
        run_cli(capsys, "index", "--corpus", corpus, "--tokenizer", "unicode-word", "--out", index_path)
        code, out, _ = run_cli(capsys, "match", "--pairs", str(pairs_path), "--index", index_path)
        assert code == 0
        report = json.loads(out)
        assert len(report["pairs"]) == 2
        assert {"precision", "recall", "f1", "accuracy"} <= set(report["metrics"])

    def test_sweep_command(self, capsys, tmp_path):
        config_path = str(tmp_path / "config.json")
        save_config(make_config(tmp_path), config_path)
        out_csv = str(tmp_path / "sweep.csv")
        code, out, _ = run_cli(capsys, "sweep", "--pipeline-config", config_path,
                               "--topics", "1,2", "--out", out_csv)
        assert code == 0
        lines = open(out_csv, encoding="utf-8").read().strip().splitlines()
        assert lines[0].startswith("k_topics,")
        assert len(lines) == 3

    def test_sweep_single_k_matches_direct_run(self, tmp_path):
        from dataclasses import replace
        from faqfuse.config import KnowledgeSpec as KS
        from faqfuse.sweep import evaluate_split_queries, sweep_topics
        config = make_config(tmp_path)
        rows = sweep_topics(config, [2], eval_split="valid")
        direct_cfg = replace(config, plsa=replace(config.plsa, k_topics=2),
                             knowledge=KS(topical=True, topical_top_l=config.knowledge.topical_top_l))
        assembly = assemble_pipeline(direct_cfg, collection="train")
        report, _ = evaluate_split_queries(assembly.pipeline, assembly.valid.pairs)
        assert rows[0]["error"] is None
        for key, value in report.to_dict().items():
            assert rows[0][key] == value

    def test_sweep_marks_failures_and_continues(self, capsys, tmp_path):
        config_path = str(tmp_path / "config.json")
        save_config(make_config(tmp_path), config_path)
        out_json = str(tmp_path / "sweep.json")
        # K far beyond the vocabulary fails; the other K still evaluates
        code, _, _ = run_cli(capsys, "sweep", "--pipeline-config", config_path,
                             "--topics", "100000,2", "--out", out_json)
        assert code == 0
        rows = json.loads(open(out_json, encoding="utf-8").read())
        assert rows[0]["error"] is not None
        assert rows[1]["error"] is None and 0 <= rows[1]["accuracy"] <= 1


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("svc")
    assembly = assemble_pipeline(make_config(tmp_path), collection="full")
    server = create_server(assembly.pipeline, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield assembly.pipeline, f"http://{host}:{port}"
    server.shutdown()
    server.server_close()


class TestService:
    def test_health(self, service):
        _, url = service
        resp = requests.get(f"{url}/health", timeout=5)
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_retrieve_matches_library(self, service):
        pipeline, url = service
        query = pipeline.corpus.pairs[0].question
        resp = requests.post(f"{url}/retrieve", json={"query": query, "top_k": 4}, timeout=5)
        assert resp.status_code == 200
        body = resp.json()
        direct = retrieve(pipeline, query, top_k=4)
        assert body["answer"] == pipeline.corpus.answers[direct.chosen_answer]
        assert len(body["ranked"]) == 4
        for got, want in zip(body["ranked"], direct.entries):
            assert got["rs"] == want.rs
            assert got["bm25_norm"] == want.bm25_norm
            assert got["relevance"] == want.relevance

    def test_match_matches_library(self, service):
        pipeline, url = service
        left, right = pipeline.corpus.pairs[0].question, pipeline.corpus.pairs[1].question
        resp = requests.post(f"{url}/match", json={"left": left, "right": right}, timeout=5)
        assert resp.status_code == 200
        score, label = match(pipeline, left, right)
        assert resp.json() == {"score": score, "label": label}

    def test_invalid_json_is_400(self, service):
        _, url = service
        resp = requests.post(f"{url}/retrieve", data=b"{not json", timeout=5)
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_missing_query_is_400(self, service):
        _, url = service
        resp = requests.post(f"{url}/retrieve", json={"top_k": 3}, timeout=5)
        assert resp.status_code == 400

    def test_unknown_path_is_404(self, service):
        _, url = service
        assert requests.post(f"{url}/nope", json={}, timeout=5).status_code == 404

    def test_training_question_retrieves_its_gold_answer(self):
        # collision-free corpus served BM25-only: the service must hand back
        # each training question's own answer
        from faqfuse.bm25 import build_index
        from faqfuse.corpus import build_corpus
        from faqfuse.ranking import Pipeline
        corpus = build_corpus(
            [(str(i), f"tok{i}a tok{i}b common{i % 3}", f"answer {i}") for i in range(12)],
            "unicode-word")
        pipeline = Pipeline(corpus=corpus, index=build_index(corpus), scorer=None,
                            fusion=FusionConfig(alpha=1.0))
        server = create_server(pipeline, port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.server_address
            for pair in corpus.pairs[:5]:
                resp = requests.post(f"http://{host}:{port}/retrieve",
                                     json={"query": pair.question}, timeout=5)
                assert resp.json()["answer"] == pair.answer
        finally:
            server.shutdown()
            server.server_close()

    def test_protocol_fixture_file_is_schema_valid(self):
        fixtures = json.loads((FIXTURES / "score_protocol.json").read_text(encoding="utf-8"))
        assert (FIXTURES / fixtures["corpus"]).exists()
        names = set()
        for entry in fixtures["requests"]:
            names.add(entry["name"])
            req = entry["request"]
            if req["mode"] == "faq":
                assert isinstance(req["query"], str) and req["query"]
                assert isinstance(req["answer_ids"], list) and req["answer_ids"]
            else:
                assert req["mode"] == "match"
                assert req["left"] and req["right"]
            for key in ("injected", "injected_left", "injected_right"):
                injected = req.get(key)
                if injected is not None:
                    n = len(injected["tokens"])
                    assert len(injected["soft_positions"]) == n
                    assert len(injected["trunk_mask"]) == n
                    assert len(injected["visible"]) == n
                    assert all(len(row) == n for row in injected["visible"])
        for entry in fixtures["requests"]:
            if "equals" in entry:
                assert entry["equals"] in names
