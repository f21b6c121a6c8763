"""Dataset readers and writers.

Supported inputs: CoNLL-U treebanks (segmentation, tagging, lemmas), one-JSON-
per-line NER files, SQuAD-v1 style QA JSON and three-column sentiment TSV.
Outputs: text-to-text pair files and prediction files, both JSON lines.
"""
from __future__ import annotations

import json
import logging
from typing import IO, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .core import (
    SENTIMENT_LABELS,
    Corpus,
    Entity,
    Morpheme,
    NerRecord,
    PairRecord,
    QAExample,
    Sentence,
    SentimentExample,
    Task,
    Word,
    canonical_surface,
)

logger = logging.getLogger(__name__)

__all__ = [
    "DataFormatError", "PairRecord", "QAReadResult", "bio_to_entities", "read_conllu",
    "read_ner", "read_ner_bio", "read_pairs", "read_predictions", "read_qa",
    "read_sentiment", "write_conllu", "write_pairs", "write_predictions",
]


class DataFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


def _lines(stream: IO[str]) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(stream, 1):
        yield lineno, line.rstrip("\r\n")


# --- CoNLL-U ----------------------------------------------------------------------

def read_conllu(stream: IO[str]) -> Corpus:
    """Read a CoNLL-U stream into a corpus.

    A multiword-token range row ``i-j`` becomes one word whose surface is the
    range's FORM and whose morphemes are rows ``i..j``; other rows become
    single-morpheme words. Empty nodes (``i.j``) are skipped. Unknown UPOS
    values are kept; check them with :func:`~mrlcast.core.validate_corpus`.
    """
    sentences: list[Sentence] = []
    block: list[tuple[int, str]] = []
    comments: list[str] = []
    for lineno, line in _lines(stream):
        if not line.strip():
            if block:
                sentences.append(_conllu_sentence(block, comments, len(sentences) + 1))
            block, comments = [], []
        elif line.startswith("#"):
            comments.append(line)
        else:
            block.append((lineno, line))
    if block:
        sentences.append(_conllu_sentence(block, comments, len(sentences) + 1))
    return Corpus(tuple(sentences))


def _conllu_sentence(rows: list[tuple[int, str]], comments: list[str], index: int) -> Sentence:
    sid = str(index)
    for c in comments:
        body = c[1:].strip()
        if body.startswith("sent_id") and "=" in body:
            sid = body.split("=", 1)[1].strip()
    words: list[Word] = []
    open_range = None  # (start, end, form, extra, lineno, morphemes)
    last_id = 0
    for lineno, line in rows:
        cols = line.split("\t")
        if len(cols) != 10:
            raise DataFormatError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
        tid = cols[0]
        if "." in tid:
            continue
        if "-" in tid:
            try:
                start, end = (int(x) for x in tid.split("-"))
            except ValueError:
                raise DataFormatError(f"bad range id {tid!r}", lineno) from None
            if open_range is not None or start <= last_id or end < start:
                raise DataFormatError(f"overlapping or invalid multiword range {tid}", lineno)
            open_range = (start, end, cols[1], tuple(cols[2:]), lineno, [])
            continue
        try:
            k = int(tid)
        except ValueError:
            raise DataFormatError(f"bad token id {tid!r}", lineno) from None
        if k <= last_id:
            raise DataFormatError(f"token id {k} out of order", lineno)
        last_id = k
        morph = Morpheme(cols[1], cols[3], cols[2], tuple(cols[4:]))
        if open_range is not None:
            start, end, form, extra, _, morphs = open_range
            if not start <= k <= end:
                raise DataFormatError(f"token {k} falls outside open range {start}-{end}", lineno)
            morphs.append(morph)
            if k == end:
                words.append(Word(form, tuple(morphs), extra))
                open_range = None
        else:
            words.append(Word(cols[1], (morph,)))
    if open_range is not None:
        raise DataFormatError(f"multiword range {open_range[0]}-{open_range[1]} is incomplete",
                              open_range[4])
    return Sentence(sid, tuple(words), tuple(comments))


def write_conllu(corpus: Iterable[Sentence], stream: IO[str]) -> int:
    """Debug writer; inverse of :func:`read_conllu` on the corpus model.

    Token ids are renumbered. Columns the model does not interpret are written
    back from the side channel, or as ``_``.
    """
    n = 0
    for sentence in corpus:
        stream.write(f"# sent_id = {sentence.id}\n")
        for c in sentence.comments:
            body = c[1:].strip()
            if not (body.startswith("sent_id") and "=" in body):
                stream.write(c + "\n")
        k = 1
        for word in sentence.words:
            morphs = word.morphemes
            if len(morphs) > 1 or morphs[0].form != word.surface:
                extra = word.extra if len(word.extra) == 8 else ("_",) * 8
                stream.write("\t".join((f"{k}-{k + len(morphs) - 1}", word.surface, *extra)) + "\n")
            for m in morphs:
                extra = m.extra if len(m.extra) == 6 else ("_",) * 6
                stream.write("\t".join((str(k), m.form, m.lemma, m.tag, *extra)) + "\n")
                k += 1
        stream.write("\n")
        n += 1
    return n


# --- NER --------------------------------------------------------------------------

NER_LEVELS = ("token", "morpheme")


def read_ner(stream: IO[str], level: str = "token") -> list[NerRecord]:
    """Read ``{"id", "text", "entities": [{"surface", "type"}]}`` lines.

    Entity surfaces are whitespace-normalized; order and duplicates are kept.
    """
    if level not in NER_LEVELS:
        raise ValueError(f"level must be one of {NER_LEVELS}, got {level!r}")
    records = []
    for lineno, line in _lines(stream):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc.msg}", lineno) from None
        try:
            entities = tuple(Entity(canonical_surface(e["surface"]), e["type"]) for e in obj["entities"])
            records.append(NerRecord(str(obj["id"]), obj["text"], entities, level))
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"missing field {exc}", lineno) from None
    return records


def bio_to_entities(tokens: Sequence[str], tags: Sequence[str]) -> list[Entity]:
    """Rebuild entities from BIO (or BIOES) tags; runs are joined with spaces.

    An ``I-X`` that does not continue an ``X`` run starts a new entity.
    """
    if len(tokens) != len(tags):
        raise ValueError("tokens and tags differ in length")
    out: list[Entity] = []
    run: list[str] = []
    run_type = None

    def flush():
        nonlocal run, run_type
        if run:
            out.append(Entity(" ".join(run), run_type))
        run, run_type = [], None

    for tok, tag in zip(tokens, tags):
        if tag == "O" or "-" not in tag:
            flush()
            continue
        prefix, etype = tag.split("-", 1)
        if prefix in ("B", "S") or etype != run_type:
            flush()
        run.append(tok)
        run_type = etype
        if prefix in ("E", "S"):
            flush()
    flush()
    return out


def read_ner_bio(stream: IO[str], level: str = "token") -> list[NerRecord]:
    """Read whitespace-separated ``token tag`` columns, blank-line separated."""
    records = []
    tokens: list[str] = []
    tags: list[str] = []

    def emit():
        if tokens:
            rid = str(len(records) + 1)
            records.append(NerRecord(rid, " ".join(tokens), tuple(bio_to_entities(tokens, tags)), level))
        tokens.clear()
        tags.clear()

    for lineno, line in _lines(stream):
        if not line.strip():
            emit()
            continue
        parts = line.split()
        if len(parts) < 2:
            raise DataFormatError("expected token and tag columns", lineno)
        tokens.append(parts[0])
        tags.append(parts[-1])
    emit()
    return records


# --- QA ---------------------------------------------------------------------------

class QAReadResult(NamedTuple):
    examples: list
    skipped: int


def read_qa(stream: IO[str]) -> QAReadResult:
    """Read SQuAD-v1 style JSON; questions without answers are skipped and counted.
    ``answer_start`` offsets are ignored."""
    try:
        data = json.load(stream)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    examples = []
    skipped = 0
    try:
        for article in data["data"]:
            for para in article["paragraphs"]:
                context = para["context"]
                for qa in para["qas"]:
                    answers = tuple(a["text"] for a in qa.get("answers", ()))
                    if not answers:
                        skipped += 1
                        continue
                    examples.append(QAExample(str(qa["id"]), context, qa["question"], answers))
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"missing field {exc}") from None
    if skipped:
        logger.warning("skipped %d question(s) without answers", skipped)
    return QAReadResult(examples, skipped)


# --- sentiment --------------------------------------------------------------------

def read_sentiment(stream: IO[str]) -> list[SentimentExample]:
    """Read ``id<TAB>label<TAB>text`` rows; an ``id label text`` header is skipped."""
    out = []
    for lineno, line in _lines(stream):
        if not line.strip():
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise DataFormatError("expected 3 tab-separated columns", lineno)
        sid, label, text = parts
        if lineno == 1 and (sid, label) == ("id", "label"):
            continue
        if label not in SENTIMENT_LABELS:
            raise DataFormatError(f"unknown label {label!r} line {lineno}")
        out.append(SentimentExample(sid, text, label))
    return out


# --- pairs and predictions -------------------------------------------------------

def write_pairs(records: Iterable[PairRecord], stream: IO[str]) -> int:
    records = list(records)
    tasks = {Task(r.task) for r in records}
    if len(tasks) > 1:
        raise ValueError(f"records mix tasks: {sorted(t.value for t in tasks)}")
    for r in records:
        stream.write(json.dumps({"id": r.id, "input": r.input, "target": r.target},
                                ensure_ascii=False) + "\n")
    return len(records)


def read_pairs(stream: IO[str], task) -> list[PairRecord]:
    task = Task(task)
    out = []
    for lineno, line in _lines(stream):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(PairRecord(obj["id"], obj["input"], obj["target"], task))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataFormatError(f"bad pair record: {exc}", lineno) from None
    return out


def read_predictions(stream: IO[str]) -> dict[str, str]:
    """Read ``{"id", "output"}`` lines into an ordered id -> output map."""
    out: dict[str, str] = {}
    for lineno, line in _lines(stream):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            pid, output = str(obj["id"]), obj["output"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataFormatError(f"bad prediction record: {exc}", lineno) from None
        if not isinstance(output, str):
            raise DataFormatError("output must be a string", lineno)
        if pid in out:
            raise DataFormatError(f"duplicate prediction id {pid!r}", lineno)
        out[pid] = output
    return out


def write_predictions(predictions: Mapping[str, str] | Iterable[tuple[str, str]], stream: IO[str]) -> int:
    items = predictions.items() if isinstance(predictions, Mapping) else predictions
    n = 0
    for pid, output in items:
        stream.write(json.dumps({"id": pid, "output": output}, ensure_ascii=False) + "\n")
        n += 1
    return n
