"""Shared generators and independent oracles for the test suite."""
import random
from collections import Counter, defaultdict
from pathlib import Path

from mrlcast.core import Task

DATA = Path(__file__).resolve().parents[1] / "src" / "mrlcast" / "data"

FIXTURES = {
    Task.SEG: "babayit.conllu",
    Task.TAG: "babayit.conllu",
    Task.LEMMA: "babayit.conllu",
    Task.NER: "ner.jsonl",
    Task.QA: "qa.json",
    Task.SENTIMENT: "sentiment.tsv",
}

# pieces biased toward delimiter edge cases
FUZZ_ALPHABET = list("ab@>$\\ \t<_enא") + [
    "@@", ">>", " $$ ", "<no_entities>", "<extra_id_0>", "<extra_id_1>", "<extra_id_", "\\@",
    "\\\\", ">>X", "x>>y", "  ",
]


def fuzz_strings(n, seed=0, max_pieces=8):
    rng = random.Random(seed)
    for _ in range(n):
        yield "".join(rng.choice(FUZZ_ALPHABET) for _ in range(rng.randint(0, max_pieces)))


def brute_force_mfa(train, test, fallback="NOUN"):
    """Replay MFA by counting with plain dicts: per surface, the full analysis
    with the highest count, ties broken by first occurrence. Returns
    ``(matched, gold, pred)`` TAG item counts over ``test``."""
    counts = defaultdict(Counter)
    first = {}
    for s in train:
        for w in s.words:
            key = tuple((m.form, m.tag, m.lemma) for m in w.morphemes)
            counts[w.surface][key] += 1
            first.setdefault((w.surface, key), len(first))
    best = {}
    for surface, c in counts.items():
        best[surface] = min(c, key=lambda k: (-c[k], first[(surface, k)]))
    matched = gold_n = pred_n = 0
    for s in test:
        for w in s.words:
            gold_items = [(m.form, m.tag) for m in w.morphemes]
            analysis = best.get(w.surface, ((w.surface, fallback, w.surface),))
            pred_items = [(f, t) for f, t, _ in analysis]
            remaining = list(pred_items)
            for item in gold_items:
                if item in remaining:
                    remaining.remove(item)
                    matched += 1
            gold_n += len(gold_items)
            pred_n += len(pred_items)
    return matched, gold_n, pred_n
