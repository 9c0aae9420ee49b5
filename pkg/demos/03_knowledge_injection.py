"""Soft positions and the visible matrix, step by step.

Injects one knowledge triplet into a two-token query and prints the
augmented sequence exactly as a knowledge-aware encoder would receive it:
branch tokens sit right after their anchor, continue its soft position,
and are masked away from every other token.
"""

import numpy as np

from faqfuse import InjectionConfig, PlsaConfig, inject, train, triplets_from_topics
from faqfuse.corpus import build_corpus, tokenize
from faqfuse.knowledge import Triplet, build_kb


def show(seq):
    print(f"{'token':>14}  soft  trunk")
    for tok, pos, trunk in zip(seq.tokens, seq.soft_positions, seq.trunk_mask):
        print(f"{tok:>14}  {pos:>4}  {'x' if trunk else ' '}")
    print("visible matrix:")
    print(np.array(seq.visible, dtype=int))
    print()


kb = build_kb([Triplet("tax", "paid_at", "office")])
show(inject(["pay", "tax"], kb))

# two anchored branches: mutually invisible, soft positions overlap
kb2 = build_kb([Triplet("pay", "synonym", "settle"), Triplet("tax", "paid_at", "office")])
show(inject(["pay", "tax"], kb2))

# topical triplets mined from a corpus feed the same mechanism
records = [(str(i), f"pay the tax {i}", "at the office counter") for i in range(6)]
corpus = build_corpus(records, tokenizer_mode="unicode-word")
model = train(corpus, PlsaConfig(k_topics=1, seed=0))
topical = triplets_from_topics(model, top_l=3)
print(f"{len(topical)} topical triplets, e.g. {sorted(topical.triplets)[0]}")
seq = inject(tokenize("how do i pay the tax", "unicode-word"), topical,
             InjectionConfig(max_triplets_per_token=1))
print("injected tokens:", seq.tokens)
