import io

import pytest

from helpers import DATA
from mrlcast.core import Entity, PairRecord, Task
from mrlcast.ingest import (
    DataFormatError,
    bio_to_entities,
    read_conllu,
    read_ner,
    read_ner_bio,
    read_pairs,
    read_predictions,
    read_qa,
    read_sentiment,
    write_conllu,
    write_pairs,
    write_predictions,
)


def row(*cols):
    cols = list(cols) + ["_"] * (10 - len(cols))
    return "\t".join(cols)


def load(name):
    with open(DATA / name, encoding="utf-8") as fh:
        return fh.read()


def test_multiword_range_becomes_one_word():
    corpus = read_conllu(io.StringIO(load("babayit.conllu")))
    s = corpus.by_id()["babayit-halavan"]
    assert [w.surface for w in s.words] == ["babayit", "halavan"]
    assert [(m.form, m.tag) for m in s.words[0].morphemes] == [("be", "ADP"), ("ha", "DET"), ("bayit", "NOUN")]
    assert [m.form for m in s.words[1].morphemes] == ["ha", "lavan"]


def test_single_rows_are_single_morpheme_words():
    s = read_conllu(io.StringIO(load("babayit.conllu"))).by_id()["habayit"]
    assert s.words[1].surface == "gadol" and len(s.words[1].morphemes) == 1


def test_crlf_and_empty_nodes():
    text = "\r\n".join([row("1", "a", "a", "NOUN"), row("1.1", "x", "x", "NOUN"), row("2", "b", "b", "VERB"), ""])
    s = list(read_conllu(io.StringIO(text, newline="")))[0]
    assert [w.surface for w in s.words] == ["a", "b"]
    assert s.id == "1"


def test_wrong_column_count_reports_line():
    with pytest.raises(DataFormatError) as exc:
        read_conllu(io.StringIO("# c\n1\ta\n"))
    assert exc.value.line == 2


@pytest.mark.parametrize("rows", [
    [row("1-2", "ab"), row("1", "a"), row("2-3", "bc")],
    [row("1-3", "abc"), row("1", "a"), row("2", "b")],
    [row("2", "a"), row("1", "b")],
])
def test_bad_ranges_raise(rows):
    with pytest.raises(DataFormatError):
        read_conllu(io.StringIO("\n".join(rows) + "\n"))


def test_write_read_identity():
    corpus = read_conllu(io.StringIO(load("babayit.conllu")))
    buf = io.StringIO()
    write_conllu(corpus, buf)
    again = read_conllu(io.StringIO(buf.getvalue()))
    assert again == corpus


def test_read_ner_canonicalizes():
    line = '{"id": 1, "text": "t", "entities": [{"surface": " habayit  halavan", "type": "FAC"}]}\n'
    rec = read_ner(io.StringIO(line))[0]
    assert rec.id == "1" and rec.entities == (Entity("habayit halavan", "FAC"),)


def test_read_ner_fixture():
    recs = read_ner(io.StringIO(load("ner.jsonl")))
    assert len(recs) == 3 and recs[1].entities == ()


def test_bio_to_entities():
    toks = ["habayit", "halavan", "be", "vashington"]
    assert bio_to_entities(toks, ["B-FAC", "I-FAC", "O", "S-GPE"]) == [
        Entity("habayit halavan", "FAC"), Entity("vashington", "GPE")]
    assert bio_to_entities(["a", "b"], ["I-PER", "I-ORG"]) == [Entity("a", "PER"), Entity("b", "ORG")]


def test_read_ner_bio():
    recs = read_ner_bio(io.StringIO("a B-PER\nb I-PER\n\nc O\n"))
    assert [r.entities for r in recs] == [(Entity("a b", "PER"),), ()]


def test_read_qa_skips_unanswered():
    res = read_qa(io.StringIO(load("qa.json")))
    assert len(res.examples) == 2 and res.skipped == 0
    doc = '{"data": [{"paragraphs": [{"context": "c", "qas": [{"id": "x", "question": "q", "answers": []}]}]}]}'
    assert read_qa(io.StringIO(doc)).skipped == 1


def test_read_qa_bad_json():
    with pytest.raises(DataFormatError):
        read_qa(io.StringIO("{"))


def test_read_sentiment():
    rows = read_sentiment(io.StringIO(load("sentiment.tsv")))
    assert [r.label for r in rows] == ["positive", "negative", "neutral"]
    with pytest.raises(DataFormatError, match="unknown label 'neu' line 2"):
        read_sentiment(io.StringIO("a\tpositive\tx\nb\tneu\ty\n"))


def test_pairs_roundtrip_and_mixed_tasks():
    recs = [PairRecord("1", "in", "out", Task.SEG), PairRecord("2", "in2", "o@@t", Task.SEG)]
    buf = io.StringIO()
    assert write_pairs(recs, buf) == 2
    assert read_pairs(io.StringIO(buf.getvalue()), Task.SEG) == recs
    with pytest.raises(ValueError):
        write_pairs([recs[0], PairRecord("3", "a", "b", Task.NER)], io.StringIO())


def test_predictions_roundtrip_and_duplicates():
    buf = io.StringIO()
    write_predictions({"a": "x", "b": ""}, buf)
    assert read_predictions(io.StringIO(buf.getvalue())) == {"a": "x", "b": ""}
    with pytest.raises(DataFormatError, match="duplicate"):
        read_predictions(io.StringIO('{"id": "a", "output": "x"}\n{"id": "a", "output": "y"}\n'))
    with pytest.raises(DataFormatError):
        read_predictions(io.StringIO('{"id": "a"}\n'))
