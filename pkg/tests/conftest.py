import random

import pytest

from faqfuse.corpus import Corpus, build_corpus


def make_corpus(records, tokenizer_mode="unicode-word") -> Corpus:
    return build_corpus(records, tokenizer_mode)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return make_corpus([
        ("0", "how do i pay the city tax", "visit the tax office counter b"),
        ("1", "where is the central library", "central square second floor"),
        ("2", "who has to pay city tax", "visit the tax office counter b"),
        ("3", "library opening hours", "nine to five on weekdays"),
    ])


def random_corpus(rng: random.Random, n_pairs: int, vocab_size: int = 12,
                  max_len: int = 8, n_answers: int = None) -> Corpus:
    """Random lowercase-token corpus; answers drawn from a smaller pool so
    they repeat across questions."""
    vocab = [f"w{i}" for i in range(vocab_size)]
    n_answers = n_answers or max(1, n_pairs // 2)
    answers = [f"answer text number {i}" for i in range(n_answers)]
    records = []
    for i in range(n_pairs):
        q = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, max_len)))
        records.append((str(i), q, rng.choice(answers)))
    return make_corpus(records)
