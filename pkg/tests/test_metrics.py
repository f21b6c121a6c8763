import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from mrlcast.core import Entity, MorphMode, QAExample, sentence_from_analysis
from mrlcast.metrics import (
    MissingPredictionsError,
    classification_f1,
    error_reduction,
    mset_counts,
    mset_scores,
    ner_scores,
    normalize_answer,
    qa_scores,
    score_delta,
)

items = st.lists(st.lists(st.sampled_from("abcd"), max_size=4), max_size=4)


def one_word(sid="1"):
    return sentence_from_analysis(sid, [("babayit", [("be", "ADP", "be"), ("ha", "DET", "ha"),
                                                     ("bayit", "NOUN", "bayit")])])


def test_mset_hand_fixture():
    r = mset_scores([one_word()], {"1": (("be", "bayit"),)}, MorphMode.SEG)
    assert (r.support["matched_items"], r.support["pred_items"], r.support["gold_items"]) == (2, 2, 3)
    assert r.precision == 1.0 and abs(r.recall - 2 / 3) < 1e-12 and abs(r.f1 - 0.8) < 1e-9


def test_mset_tag_items_pair_form_and_tag():
    pred = {"1": ((("be", "ADP"), ("ha", "NOUN"), ("bayit", "NOUN")),)}
    r = mset_scores([one_word()], pred, MorphMode.TAG)
    assert r.support["matched_items"] == 2


def test_mset_unaligned_words_count_on_their_side():
    assert mset_counts([["a"]], [["a"], ["b", "c"]]) == (1, 1, 3)


def test_missing_ids_raise():
    with pytest.raises(MissingPredictionsError) as exc:
        mset_scores([one_word("x")], {}, MorphMode.SEG)
    assert exc.value.missing == ["x"]


@settings(max_examples=200, deadline=None)
@given(items, items)
def test_mset_counts_invariants(gold, pred):
    m, g, p = mset_counts(gold, pred)
    assert m <= min(g, p)
    assert mset_counts(gold, gold) == (g, g, g)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(items, items), min_size=1, max_size=6), st.randoms())
def test_report_invariant_to_order(pairs, rnd):
    gold = []
    preds = {}
    for i, (g, p) in enumerate(pairs):
        words = [(f"w{j}", [(f, "NOUN", f) for f in w] or [("x", "NOUN", "x")]) for j, w in enumerate(g)]
        gold.append(sentence_from_analysis(str(i), words or [("w", [("x", "NOUN", "x")])]))
        preds[str(i)] = tuple(tuple(w) for w in p)
    a = mset_scores(gold, preds, MorphMode.SEG)
    shuffled = list(gold)
    rnd.shuffle(shuffled)
    b = mset_scores(shuffled, dict(reversed(list(preds.items()))), MorphMode.SEG)
    assert a.to_dict() == b.to_dict()
    if a.precision + a.recall:
        assert abs(a.f1 - 2 * a.precision * a.recall / (a.precision + a.recall)) < 1e-12


def test_ner_boundary_fixture():
    r = ner_scores({"1": [Entity("habayit halavan", "FAC")]}, {"1": [Entity("babayit halavan", "FAC")]})
    assert r.f1 == 0 and r.support["matched_items"] == 0


def test_ner_multiset_and_position_free():
    gold = {"1": [Entity("a", "PER"), Entity("a", "PER"), Entity("b", "LOC")]}
    pred = {"1": [Entity("b", "LOC"), Entity("a ", "PER")]}
    r = ner_scores(gold, pred)
    assert r.support["matched_items"] == 2 and r.precision == 1.0


def test_ner_type_mismatch():
    r = ner_scores({"1": [Entity("a", "PER")]}, {"1": [Entity("a", "ORG")]})
    assert r.f1 == 0


@pytest.mark.parametrize("raw,norm", [("Habayit, halavan!", "habayit halavan"), ("", ""), ("a   b", "a b")])
def test_normalize_answer(raw, norm):
    assert normalize_answer(raw) == norm


def test_qa_fixtures():
    gold = [QAExample("q", "ctx", "?", ("habayit halavan",))]
    r = qa_scores(gold, {"q": "babayit halavan"})
    assert r.em == 0 and abs(r.f1 - 0.5) < 1e-9
    assert qa_scores(gold, {"q": "Habayit halavan."}).em == 1.0
    assert qa_scores(gold, {"q": "gadol"}).f1 == 0
    assert qa_scores(gold, {"q": ""}).f1 == 0


def test_qa_max_over_answers_and_both_empty():
    gold = [QAExample("q", "c", "?", ("x y z", "bevashington"))]
    assert qa_scores(gold, {"q": "bevashington"}).f1 == 1.0
    gold = [QAExample("q", "c", "?", ("!!",))]
    assert qa_scores(gold, {"q": ""}).f1 == 1.0


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab ,", max_size=8), st.text(alphabet="ab ,", max_size=8))
def test_qa_em_implies_f1(pred, ans):
    r = qa_scores([QAExample("q", "c", "?", (ans,))], {"q": pred})
    if r.em == 1:
        assert r.f1 == 1


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["positive", "negative", "neutral"]),
                          st.sampled_from(["positive", "negative", "neutral"])), min_size=1, max_size=30))
def test_classification_matches_sklearn(pairs):
    gold = [g for g, _ in pairs]
    pred = [p for _, p in pairs]
    labels = sorted(set(gold) | set(pred))
    r = classification_f1(gold, pred)
    p, rec, f, _ = precision_recall_fscore_support(gold, pred, labels=labels, average="macro", zero_division=0)
    assert abs(r.precision - p) < 1e-9 and abs(r.recall - rec) < 1e-9 and abs(r.f1 - f) < 1e-9
    assert abs(r.details["accuracy"] - accuracy_score(gold, pred)) < 1e-9
    for avg in ("micro", "weighted"):
        ref = precision_recall_fscore_support(gold, pred, labels=labels, average=avg, zero_division=0)[2]
        assert abs(r.details[f"{avg}_f1"] - ref) < 1e-9


def test_classification_abstain_counts_wrong():
    r = classification_f1(["positive", "negative"], ["positive", None])
    assert r.details["accuracy"] == 0.5 and r.details["abstained"] == 1
    assert r.details["per_class"]["negative"]["recall"] == 0


def test_error_reduction_reference_values():
    assert 30.2 <= error_reduction(98.09, 98.67) <= 30.5
    assert 32.7 <= error_reduction(96.22, 97.46) <= 32.9
    assert error_reduction(100, 100) == 0.0
    with pytest.raises(ValueError):
        error_reduction(100, 99)
    with pytest.raises(ValueError):
        error_reduction(101, 99)


def test_score_delta_exact():
    assert score_delta(78.6, 95.53) == 16.93
    assert score_delta(49.6, 77.5) == 27.9


def test_report_json_key_order():
    r = mset_scores([one_word()], {"1": (("be",),)}, MorphMode.SEG)
    assert list(r.to_dict())[:4] == ["task", "precision", "recall", "f1"]
    assert '"task": "SEG"' in r.to_json()
