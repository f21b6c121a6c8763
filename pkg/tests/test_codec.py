import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrlcast.codec import (
    CodecConfig,
    MorphLinearizer,
    ParseError,
    analysis_of,
    escape,
    linearize_morph,
    linearize_ner,
    linearize_qa,
    linearize_sentiment,
    parse_morph,
    parse_ner,
    parse_output,
    parse_qa,
    parse_sentiment,
    unescape,
)
from mrlcast.core import UD_UPOS, Entity, MorphMode, QAExample, SentimentExample, Task, sentence_from_analysis

token = st.text(alphabet="ab@>$\\xא", min_size=1, max_size=6)
morpheme = st.tuples(token, st.sampled_from(UD_UPOS), token)
word = st.tuples(token, st.lists(morpheme, min_size=1, max_size=5))
sentence = st.lists(word, min_size=1, max_size=5).map(lambda ws: sentence_from_analysis("h", ws))
entity = st.builds(Entity, st.lists(token, min_size=1, max_size=3).map(" ".join),
                   st.sampled_from(["PER", "ORG", "FAC"]))


def babayit():
    return sentence_from_analysis("1", [
        ("babayit", [("be", "ADP", "be"), ("ha", "DET", "ha"), ("bayit", "NOUN", "bayit")]),
        ("halavan", [("ha", "DET", "ha"), ("lavan", "NOUN", "lavan")]),
    ])


def test_linearize_running_example():
    s = babayit()
    assert linearize_morph(s, MorphMode.SEG) == "be@@ha@@bayit ha@@lavan"
    assert linearize_morph(s, MorphMode.TAG) == "be>>ADP@@ha>>DET@@bayit>>NOUN ha>>DET@@lavan>>NOUN"
    assert linearize_morph(s, MorphMode.LEMMA) == "be>>be@@ha>>ha@@bayit>>bayit ha>>ha@@lavan>>lavan"


@settings(max_examples=300, deadline=None)
@given(sentence, st.sampled_from(list(MorphMode)), st.booleans())
def test_morph_roundtrip(s, mode, strict):
    text = linearize_morph(s, mode)
    assert parse_morph(text, mode, strict=strict).value == analysis_of(s, mode)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=20))
def test_escape_roundtrip(text):
    assert unescape(escape(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="a@>$\\", max_size=8), st.text(alphabet="a@>$\\", max_size=8))
def test_escape_injective(a, b):
    if a != b:
        assert escape(a) != escape(b)


@pytest.mark.parametrize("bad", ["a\\", "\\a"])
def test_unescape_rejects(bad):
    with pytest.raises(ValueError):
        unescape(bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(entity, max_size=4))
def test_ner_roundtrip(entities):
    assert parse_ner(linearize_ner(entities), strict=True).value == entities


def test_ner_empty_token():
    assert linearize_ner([]) == "<no_entities>"
    assert parse_ner("<no_entities>", strict=True).value == []


def test_ner_lenient_drops_untyped_chunks():
    res = parse_ner("habayit halavan>>FAC $$ junk")
    assert res.value == [Entity("habayit halavan", "FAC")] and res.notes


def test_qa_pair_and_parse():
    rec = linearize_qa(QAExample("q", "ctx here", "what?", ("ans one", "other")))
    assert rec.input == "ctx here\nwhat?" and rec.target == "ans one"
    assert parse_qa("  ans ").value == "ans"
    with pytest.raises(ParseError):
        parse_qa(" ans", strict=True)


def test_sentiment():
    assert linearize_sentiment(SentimentExample("t", "x", "neutral")).target == "<extra_id_2>"
    assert parse_sentiment("<extra_id_0>", strict=True).value == "positive"
    res = parse_sentiment("<extra_id_9>")
    assert res.value is None and res.notes
    with pytest.raises(ParseError) as exc:
        parse_sentiment("<extra_id_9>", strict=True)
    assert exc.value.offset == len("<extra_id_")


@pytest.mark.parametrize("text,kind", [
    ("be@@@@bayit", "empty_segment"),
    ("@@be", "dangling_delimiter"),
    ("be@@", "dangling_delimiter"),
    ("be  ha", "extra_whitespace"),
])
def test_lenient_notes_and_strict_errors(text, kind):
    res = parse_morph(text, MorphMode.SEG)
    assert kind in {n.kind for n in res.notes}
    with pytest.raises(ParseError):
        parse_morph(text, MorphMode.SEG, strict=True)


def test_missing_tag_becomes_unk():
    res = parse_morph("be@@ha>>DET", MorphMode.TAG)
    assert res.value == ((("be", "UNK"), ("ha", "DET")),)
    with pytest.raises(ParseError) as exc:
        parse_morph("be@@ha>>DET", MorphMode.TAG, strict=True)
    assert exc.value.offset == 2


def test_empty_output():
    assert parse_morph("", MorphMode.SEG).value == ()
    with pytest.raises(ParseError):
        parse_morph("", MorphMode.SEG, strict=True)


def test_parse_output_dispatch():
    assert parse_output("be@@ha", Task.SEG).value == (("be", "ha"),)
    assert parse_output("<extra_id_1>", Task.SENTIMENT).value == "negative"


def test_config_validation_and_fingerprint(tmp_path):
    with pytest.raises(ValueError):
        CodecConfig(morph_delim=">>")
    with pytest.raises(ValueError):
        CodecConfig(morph_delim="")
    a, b = CodecConfig(), CodecConfig(morph_delim="##")
    assert a.fingerprint() != b.fingerprint() and a.fingerprint() == CodecConfig().fingerprint()
    p = tmp_path / "cfg.txt"
    p.write_text("morph_delim = ##\n")
    assert CodecConfig.from_file(p) == b


def test_custom_delimiters_roundtrip():
    cfg = CodecConfig(morph_delim="##", tag_delim="::")
    s = babayit()
    text = linearize_morph(s, MorphMode.TAG, cfg)
    assert text == "be::ADP##ha::DET##bayit::NOUN ha::DET##lavan::NOUN"
    assert parse_morph(text, MorphMode.TAG, cfg, strict=True).value == analysis_of(s, MorphMode.TAG)


def test_morph_linearizer_estimator():
    est = MorphLinearizer(mode="TAG")
    assert est.get_params()["mode"] == "TAG"
    out = est.fit_transform([babayit()])
    assert out == ["be>>ADP@@ha>>DET@@bayit>>NOUN ha>>DET@@lavan>>NOUN"]
    assert est.inverse_transform(out) == [analysis_of(babayit(), MorphMode.TAG)]
