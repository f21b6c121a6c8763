"""Scoring: aligned multiset F1, position-free NER F1, SQuAD-style QA
EM/F1, classification F1 and score-difference arithmetic.

Counts are accumulated as integers (or :class:`~fractions.Fraction` for
per-example averages) and divided once at the end, so every corpus score is
independent of example order.
"""
from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Corpus, Entity, MorphMode, QAExample, Sentence, Task, canonical_surface


class MissingPredictionsError(KeyError):
    def __init__(self, missing: Sequence[str]):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:20])
        more = f" (+{len(self.missing) - 20} more)" if len(self.missing) > 20 else ""
        super().__init__(f"missing predictions for {len(self.missing)} id(s): {shown}{more}")

    def __str__(self) -> str:
        return self.args[0]


@dataclass
class MetricReport:
    task: str
    precision: float
    recall: float
    f1: float
    support: dict
    em: float | None = None
    per_example: list | None = None
    details: dict = field(default_factory=dict)
    config_fingerprint: str | None = None

    def to_dict(self) -> dict:
        out = {
            "task": self.task,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }
        if self.em is not None:
            out["em"] = self.em
        out["support"] = dict(self.support)
        out["config_fingerprint"] = self.config_fingerprint
        if self.details:
            out["details"] = self.details
        if self.per_example is not None:
            out["per_example"] = self.per_example
        return out

    def to_json(self, **kw) -> str:
        kw.setdefault("ensure_ascii", False)
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)


def _prf(matched: int, gold: int, pred: int) -> tuple[Fraction, Fraction, Fraction]:
    p = Fraction(matched, pred) if pred else Fraction(0)
    r = Fraction(matched, gold) if gold else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f


def _report(task, matched, gold, pred, n, per_example, **details) -> MetricReport:
    p, r, f = _prf(matched, gold, pred)
    support = {"gold_items": gold, "pred_items": pred, "matched_items": matched, "examples": n}
    per_example.sort(key=lambda d: d["id"])
    return MetricReport(str(task), float(p), float(r), float(f), support,
                        per_example=per_example, details=details)


def _check_ids(gold_ids: Iterable[str], preds: Mapping) -> None:
    missing = [i for i in gold_ids if i not in preds]
    if missing:
        raise MissingPredictionsError(missing)


def mset_counts(gold_words: Sequence, pred_words: Sequence) -> tuple[int, int, int]:
    """``(matched, gold_items, pred_items)`` for one sentence under positional
    word alignment."""
    matched = gold_n = pred_n = 0
    for i in range(max(len(gold_words), len(pred_words))):
        g = Counter(gold_words[i]) if i < len(gold_words) else Counter()
        p = Counter(pred_words[i]) if i < len(pred_words) else Counter()
        matched += sum((g & p).values())
        gold_n += sum(g.values())
        pred_n += sum(p.values())
    return matched, gold_n, pred_n


def mset_scores(gold: Iterable[Sentence], preds: Mapping[str, Sequence], mode: MorphMode) -> MetricReport:
    """Aligned multiset precision/recall/F1.

    Predicted word groups are aligned to gold words by position. Items are
    forms (SEG), ``(form, tag)`` (TAG) or ``(form, lemma)`` (LEMMA) and are
    compared as multisets within each aligned pair; words without a partner
    contribute only to their own side's total. Scores are micro-averaged.
    """
    from .codec import analysis_of

    mode = MorphMode(mode)
    sentences = list(gold.sentences if isinstance(gold, Corpus) else gold)
    _check_ids((s.id for s in sentences), preds)
    matched = gold_n = pred_n = 0
    per_example = []
    for s in sentences:
        m, g, p = mset_counts(analysis_of(s, mode), preds[s.id])
        matched += m
        gold_n += g
        pred_n += p
        per_example.append({"id": s.id, "matched": m, "gold": g, "pred": p})
    return _report(mode.value, matched, gold_n, pred_n, len(sentences), per_example,
                   alignment="positional")


def _entity_items(entities: Iterable) -> Counter:
    out = Counter()
    for e in entities:
        surface, etype = (e.surface, e.etype) if isinstance(e, Entity) else e
        out[(canonical_surface(surface), etype)] += 1
    return out


def ner_scores(gold, preds: Mapping[str, Sequence[Entity]], level: str | None = None) -> MetricReport:
    """Position-free entity F1: multiset match on (surface, type).

    ``gold`` is a mapping or an iterable of ``(id, entities)`` pairs or
    :class:`~mrlcast.core.NerRecord` objects.
    """
    if isinstance(gold, Mapping):
        pairs = list(gold.items())
    else:
        pairs = [(g.id, g.entities) if hasattr(g, "entities") else tuple(g) for g in gold]
    _check_ids((i for i, _ in pairs), preds)
    matched = gold_n = pred_n = 0
    per_example = []
    for sid, entities in pairs:
        g = _entity_items(entities)
        p = _entity_items(preds[sid])
        m = sum((g & p).values())
        matched += m
        gold_n += sum(g.values())
        pred_n += sum(p.values())
        per_example.append({"id": sid, "matched": m, "gold": sum(g.values()), "pred": sum(p.values())})
    details = {"level": level} if level else {}
    return _report(Task.NER.value, matched, gold_n, pred_n, len(pairs), per_example, **details)


def normalize_answer(text: str) -> str:
    """Lowercase, drop Unicode punctuation (P* categories), collapse whitespace."""
    text = text.lower()
    text = "".join(c for c in text if not unicodedata.category(c).startswith("P"))
    return " ".join(text.split())


def qa_prf(prediction: str, answer: str) -> tuple[Fraction, Fraction, Fraction]:
    """Token precision, recall and F1 of normalized strings."""
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(answer).split()
    if not pred_tokens or not gold_tokens:
        both = Fraction(int(pred_tokens == gold_tokens))
        return both, both, both
    common = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    return _prf(common, len(gold_tokens), len(pred_tokens))


def qa_f1(prediction: str, answer: str) -> Fraction:
    return qa_prf(prediction, answer)[2]


def qa_em(prediction: str, answers: Iterable[str]) -> int:
    pred = normalize_answer(prediction)
    return int(any(pred == normalize_answer(a) for a in set(answers)))


def qa_scores(gold: Iterable[QAExample], preds: Mapping[str, str]) -> MetricReport:
    """Mean per-example EM and max-over-answers token F1."""
    examples = list(gold)
    _check_ids((e.id for e in examples), preds)
    em_sum = 0
    p_sum = r_sum = f1_sum = Fraction(0)
    per_example = []
    for ex in examples:
        pred = preds[ex.id]
        em = qa_em(pred, ex.answers)
        # best answer by F1; first one wins ties
        p, r, f1 = max((qa_prf(pred, a) for a in ex.answers), key=lambda t: t[2])
        em_sum += em
        p_sum += p
        r_sum += r
        f1_sum += f1
        per_example.append({"id": ex.id, "em": em, "f1": float(f1)})
    n = len(examples)

    def mean(x):
        return float(x / n) if n else 0.0

    non_empty = sum(1 for e in examples if normalize_answer(preds[e.id]))
    per_example.sort(key=lambda d: d["id"])
    support = {"gold_items": n, "pred_items": non_empty, "matched_items": em_sum, "examples": n}
    return MetricReport(Task.QA.value, mean(p_sum), mean(r_sum), mean(f1_sum), support,
                        em=mean(Fraction(em_sum)), per_example=per_example)


ABSTAIN = None


def classification_f1(gold: Sequence[str], preds: Sequence[str | None],
                      labels: Sequence[str] | None = None, task: str = Task.SENTIMENT.value) -> MetricReport:
    """Per-class P/R/F1 with macro, micro and support-weighted averages plus accuracy.

    The headline precision/recall/f1 are the macro averages.

    ``None`` in ``preds`` means abstain: a prediction of no class, always
    wrong. Macro averages run over ``labels`` (default: every label seen in
    gold or predictions).
    """
    if len(gold) != len(preds):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(preds)} predictions")
    if labels is None:
        labels = sorted({*gold, *(p for p in preds if p is not ABSTAIN)})
    per_class = {}
    macro_p = macro_r = macro_f = weighted_f = Fraction(0)
    for label in labels:
        tp = sum(1 for g, p in zip(gold, preds) if g == label and p == label)
        n_pred = sum(1 for p in preds if p == label)
        n_gold = sum(1 for g in gold if g == label)
        p, r, f = _prf(tp, n_gold, n_pred)
        per_class[label] = {"precision": float(p), "recall": float(r), "f1": float(f),
                            "support": n_gold}
        macro_p += p
        macro_r += r
        macro_f += f
        weighted_f += f * n_gold
    k = len(labels)
    correct = sum(1 for g, p in zip(gold, preds) if g == p)
    n = len(gold)
    accuracy = Fraction(correct, n) if n else Fraction(0)
    abstained = sum(1 for p in preds if p is ABSTAIN)
    # micro counts only predictions and gold items inside ``labels``
    in_labels = set(labels)
    micro_tp = sum(1 for g, p in zip(gold, preds) if g == p and g in in_labels)
    micro = _prf(micro_tp, sum(1 for g in gold if g in in_labels), sum(1 for p in preds if p in in_labels))[2]
    support = {"gold_items": n, "pred_items": n - abstained, "matched_items": correct, "examples": n}
    details = {"accuracy": float(accuracy), "macro_f1": float(macro_f / k) if k else 0.0,
               "micro_f1": float(micro), "weighted_f1": float(weighted_f / n) if n else 0.0,
               "per_class": per_class, "abstained": abstained}
    return MetricReport(task, float(macro_p / k) if k else 0.0, float(macro_r / k) if k else 0.0,
                        float(macro_f / k) if k else 0.0, support, details=details)


def _dec(x) -> Decimal:
    return x if isinstance(x, Decimal) else Decimal(repr(x)) if isinstance(x, float) else Decimal(x)


def error_reduction(old_score, new_score) -> float:
    """Relative error reduction in percent, scores given in percent."""
    old, new = _dec(old_score), _dec(new_score)
    for name, v in (("old_score", old), ("new_score", new)):
        if not 0 <= v <= 100:
            raise ValueError(f"{name} must be in [0, 100], got {v}")
    old_err = 100 - old
    if old_err == 0:
        if new == 100:
            return 0.0
        raise ValueError("error reduction undefined: old score is 100 and new score is lower")
    return float(100 * (old_err - (100 - new)) / old_err)


def score_delta(old_score, new_score) -> float:
    """``new - old`` computed in decimal so two-decimal scores subtract exactly."""
    return float(_dec(new_score) - _dec(old_score))
