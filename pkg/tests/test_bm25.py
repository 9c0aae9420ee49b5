import math
import random
from collections import Counter

import pytest

from faqfuse.bm25 import Bm25Params, build_index, load_index_bundle, rank, save_index_bundle, score, score_all
from faqfuse.corpus import build_corpus

from conftest import random_corpus


def naive_bm25(questions, query, n, k1=1.2, b=0.75):
    """Direct evaluation of the scoring formula with plain loops."""
    big_n = len(questions)
    lengths = [len(q) for q in questions]
    avg = sum(lengths) / big_n
    tf = Counter(questions[n])
    total = 0.0
    for w in query:
        n_w = sum(1 for q in questions if w in q)
        iqf = math.log(1.0 + (big_n - n_w + 0.5) / (n_w + 0.5))
        f = tf.get(w, 0)
        if f:
            total += (k1 + 1.0) * f / (k1 * ((1.0 - b) + b * lengths[n] / avg) + f) * iqf
    return total


def corpus_of(questions):
    return build_corpus([(str(i), q, f"answer {i}") for i, q in enumerate(questions)])


class TestBuildIndex:
    def test_two_question_counts(self):
        index = build_index(corpus_of(["a b", "b c"]))
        assert index.avg_len == 2
        assert len(index.postings["b"]) == 2
        assert index.postings["a"] == {0: 1}

    def test_single_question(self):
        index = build_index(corpus_of(["x y z"]))
        assert index.avg_len == 3
        assert all(len(entry) == 1 for entry in index.postings.values())

    def test_postings_match_naive_counting(self):
        rng = random.Random(11)
        corpus = random_corpus(rng, 20)
        index = build_index(corpus)
        questions = corpus.questions()
        for tok, entry in index.postings.items():
            expected = {n: q.count(tok) for n, q in enumerate(questions) if tok in q}
            assert entry == expected
        total = sum(len(q) for q in questions)
        assert abs(index.avg_len - total / len(questions)) <= 1e-12 * index.avg_len

    def test_empty_corpus_rejected(self):
        corpus = corpus_of(["a"])
        corpus.pairs = []
        with pytest.raises(ValueError):
            build_index(corpus)

    def test_iqf_non_negative(self):
        index = build_index(corpus_of(["a a a", "a b", "a c"]))
        assert all(v >= 0 for v in index.iqf.values())  # 'a' is in every question

    def test_param_validation(self):
        with pytest.raises(ValueError):
            Bm25Params(k1=-0.1)
        with pytest.raises(ValueError):
            Bm25Params(b=1.5)


class TestScore:
    def test_no_overlap_is_zero(self):
        index = build_index(corpus_of(["a b", "c d"]))
        assert score(index, ["x", "y"], 0) == 0.0

    def test_empty_query_is_zero(self):
        index = build_index(corpus_of(["a b"]))
        assert score(index, [], 0) == 0.0

    def test_hand_evaluated_example(self):
        # corpus {"a b","b c","c d"}, query "b", k1=1.2, b=0.75: every length
        # equals avg, so the denominator is k1 + f = 2.2 and the b-term is
        # (k1+1)*1/2.2 * IQF(b) = IQF(b) = ln(1 + 1.5/2.5) = ln(1.6)
        index = build_index(corpus_of(["a b", "b c", "c d"]), Bm25Params(k1=1.2, b=0.75))
        expected = math.log(1.6)
        assert score(index, ["b"], 0) == pytest.approx(expected, rel=1e-12)
        assert score(index, ["b"], 1) == pytest.approx(expected, rel=1e-12)
        assert score(index, ["b"], 2) == 0.0

    def test_repeated_query_tokens_count_per_position(self):
        index = build_index(corpus_of(["a b", "b c", "c d"]))
        assert score(index, ["b", "b"], 0) == pytest.approx(2 * score(index, ["b"], 0), rel=1e-12)

    def test_matches_naive_on_random_fixtures(self):
        rng = random.Random(23)
        for _ in range(30):
            corpus = random_corpus(rng, rng.randint(1, 20))
            index = build_index(corpus)
            questions = corpus.questions()
            query = [f"w{rng.randrange(14)}" for _ in range(rng.randint(1, 8))]
            for n in range(len(questions)):
                got = score(index, query, n)
                want = naive_bm25(questions, query, n)
                assert got == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_additivity_over_query_positions(self):
        rng = random.Random(31)
        corpus = random_corpus(rng, 12)
        index = build_index(corpus)
        q1 = ["w1", "w3"]
        q2 = ["w2", "w1", "w5"]
        for n in range(len(corpus)):
            assert score(index, q1 + q2, n) == pytest.approx(
                score(index, q1, n) + score(index, q2, n), rel=1e-12, abs=1e-15)

    def test_out_of_range_question(self):
        index = build_index(corpus_of(["a b"]))
        with pytest.raises(IndexError):
            score(index, ["a"], 5)

    def test_monotone_in_term_frequency_single_term_query(self):
        # full-statistics recompute; the multi-term version is not monotone
        # because the longer question penalizes the other query terms
        rng = random.Random(47)
        for _ in range(200):
            questions = [[rng.choice("abcd") for _ in range(rng.randint(1, 8))]
                         for _ in range(rng.randint(1, 6))]
            n = rng.randrange(len(questions))
            w = rng.choice(questions[n])
            before = naive_bm25(questions, [w], n)
            grown = [list(q) for q in questions]
            grown[n].append(w)
            after = naive_bm25(grown, [w], n)
            assert after >= before - 1e-12

    def test_monotone_in_term_frequency_fixed_statistics(self):
        # score(index, q, n) as a function of one posting frequency, with
        # lengths and IQF pinned, never decreases
        index = build_index(corpus_of(["a b c a", "b c d", "a d"]))
        query = ["a", "b", "d"]
        base = score(index, query, 0)
        index.postings["a"][0] += 1
        assert score(index, query, 0) >= base - 1e-12


class TestRank:
    def test_total_ordering(self):
        corpus = corpus_of(["a b", "b c", "c d"])
        index = build_index(corpus)
        out = rank(index, ["b", "c"], top_k=3)
        assert sorted(n for n, _ in out) == [0, 1, 2]
        assert all(s1 >= s2 for (_, s1), (_, s2) in zip(out, out[1:]))

    def test_all_zero_scores_tie_break_by_index(self):
        index = build_index(corpus_of(["a b", "b c", "c d", "d e"]))
        out = rank(index, ["zzz"], top_k=3)
        assert out == [(0, 0.0), (1, 0.0), (2, 0.0)]

    def test_matches_exhaustive_sort_on_random_fixtures(self):
        rng = random.Random(59)
        for _ in range(100):
            corpus = random_corpus(rng, rng.randint(1, 20))
            index = build_index(corpus)
            query = [f"w{rng.randrange(14)}" for _ in range(rng.randint(1, 8))]
            scores = [score(index, query, n) for n in range(len(corpus))]
            expected = sorted(range(len(corpus)), key=lambda i: (-scores[i], i))
            got = rank(index, query, top_k=len(corpus))
            assert [n for n, _ in got] == expected
            assert [s for _, s in got] == [scores[n] for n in expected]

    def test_top_k_clamped(self):
        index = build_index(corpus_of(["a", "b"]))
        assert len(rank(index, ["a"], top_k=10)) == 2

    def test_top_k_validation(self):
        index = build_index(corpus_of(["a"]))
        with pytest.raises(ValueError):
            rank(index, ["a"], top_k=0)

    def test_score_all_agrees_with_score(self):
        rng = random.Random(61)
        corpus = random_corpus(rng, 15)
        index = build_index(corpus)
        query = ["w0", "w1", "w0", "w9"]
        alls = score_all(index, query)
        for n in range(len(corpus)):
            assert alls[n] == pytest.approx(score(index, query, n), rel=1e-12, abs=1e-15)


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = random.Random(67)
        corpus = random_corpus(rng, 17)
        index = build_index(corpus, Bm25Params(k1=1.4, b=0.6))
        path = tmp_path / "index.json"
        save_index_bundle(str(path), index, corpus)
        loaded_index, loaded_corpus = load_index_bundle(str(path))
        assert loaded_index.postings == index.postings
        assert loaded_index.question_lengths == index.question_lengths
        assert loaded_index.avg_len == index.avg_len
        assert loaded_index.iqf == index.iqf
        assert loaded_index.params == index.params
        assert loaded_index.n_questions == index.n_questions
        assert [p.question for p in loaded_corpus.pairs] == [p.question for p in corpus.pairs]
        assert loaded_corpus.answers == corpus.answers

    def test_format_id_checked(self, tmp_path):
        path = tmp_path / "bogus.json"
        path.write_text('{"format": "something-else"}', encoding="utf-8")
        with pytest.raises(ValueError, match="faqfuse-bm25-v1"):
            load_index_bundle(str(path))
