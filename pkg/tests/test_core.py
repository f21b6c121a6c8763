import json

import pytest

from mrlcast.core import (
    Corpus,
    Entity,
    Morpheme,
    MorphMode,
    QAExample,
    Sentence,
    TagSet,
    Task,
    Word,
    canonical_surface,
    sentence_from_analysis,
    validate_corpus,
    validate_entity,
    validate_qa,
    validate_sentence,
)


def babayit():
    return sentence_from_analysis("1", [
        ("babayit", [("be", "ADP", "be"), ("ha", "DET", "ha"), ("bayit", "NOUN", "bayit")]),
        ("halavan", [("ha", "DET", "ha"), ("lavan", "NOUN", "lavan")]),
    ])


def test_sentence_text_joins_surfaces():
    assert babayit().text == "babayit halavan"


def test_surface_independent_of_forms():
    assert validate_sentence(babayit()) == []


def test_empty_morphemes_flagged():
    s = Sentence("x", (Word("w", ()),))
    problems = validate_sentence(s)
    assert problems and "empty morphemes at word 0" in str(problems[0])


def test_unknown_tag_flagged():
    s = sentence_from_analysis("x", [("a", [("a", "BOGUS", "a")])])
    assert any("unknown tag 'BOGUS'" in str(v) for v in validate_sentence(s))


@pytest.mark.parametrize("bad", ["", "a b", "a\tb"])
def test_bad_forms_flagged(bad):
    s = sentence_from_analysis("x", [("w", [(bad, "NOUN", "l")])])
    assert validate_sentence(s)


def test_duplicate_ids_flagged():
    c = Corpus((babayit(), babayit()))
    assert validate_corpus(c)


def test_tagset_rejects_unk_and_duplicates():
    with pytest.raises(ValueError):
        TagSet("t", ("A", "A"))
    with pytest.raises(ValueError):
        TagSet("t", ("A", "UNK"))
    with pytest.raises(ValueError):
        TagSet("t", ())


def test_tagset_from_file(tmp_path):
    p = tmp_path / "tags.json"
    p.write_text(json.dumps(["A", "B"]))
    assert list(TagSet.from_file(p)) == ["A", "B"]
    q = tmp_path / "tags.txt"
    q.write_text("A\nB\n")
    assert "B" in TagSet.from_file(q)


def test_universal_tagset_has_17_labels():
    assert len(list(TagSet.universal())) == 17


def test_task_from_cli_maps_pos():
    assert Task.from_cli("pos") is Task.TAG
    assert Task.from_cli("seg").morph_mode is MorphMode.SEG
    assert Task.QA.morph_mode is None
    with pytest.raises(ValueError):
        Task.from_cli("parse")


def test_canonical_surface():
    assert canonical_surface("  habayit \t halavan ") == "habayit halavan"


def test_entity_and_qa_validation():
    assert validate_entity(Entity("habayit halavan", "FAC")) == []
    assert validate_entity(Entity("", "FAC"))
    assert validate_entity(Entity("x", "NOPE"))
    assert validate_qa(QAExample("q", "ctx", "q?", ("a",))) == []
    assert validate_qa(QAExample("q", "ctx", "q?", ()))


def test_morpheme_extra_ignored_in_equality():
    assert Morpheme("a", "NOUN", "a", ("x",)) == Morpheme("a", "NOUN", "a")
