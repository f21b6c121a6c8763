"""Linearize gold analyses into delimiter-encoded target strings and parse
generated strings back.

Morpho-syntactic targets use two delimiters: ``@@`` between the morphemes of
one word and ``>>`` between a morpheme and its tag (or lemma). Words are
separated by single spaces::

    SEG    be@@ha@@bayit ha@@lavan
    TAG    be>>ADP@@ha>>DET@@bayit>>NOUN ha>>DET@@lavan>>NOUN
    LEMMA  be>>be@@ha>>ha@@bayit>>bayit ha>>ha@@lavan>>lavan

Every character that occurs in a delimiter, plus the escape character itself,
is *reserved*: inside a field it is written as ``<escape><char>``. This keeps
escaping injective and guarantees that no delimiter ever appears inside an
escaped field.

Parsers come in two flavours. ``strict=True`` raises :class:`ParseError` on
the first defect; the default lenient mode never raises, applies a fixed set
of recovery rules and returns the defects as :class:`Note` records.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .core import (
    UNK,
    Entity,
    MorphMode,
    PairRecord,
    QAExample,
    Sentence,
    SentimentExample,
    Task,
    canonical_surface,
)

DEFAULT_SENTINELS = (
    ("positive", "<extra_id_0>"),
    ("negative", "<extra_id_1>"),
    ("neutral", "<extra_id_2>"),
)


@dataclass(frozen=True)
class CodecConfig:
    morph_delim: str = "@@"
    tag_delim: str = ">>"
    entity_sep: str = " $$ "
    empty_entities_token: str = "<no_entities>"
    sentiment_sentinels: tuple[tuple[str, str], ...] = DEFAULT_SENTINELS
    qa_joiner: str = "\n"
    escape_char: str = "\\"
    unk_label: str = UNK
    empty_answer_token: str = "<no_answer>"
    reserved: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sentinels = self.sentiment_sentinels
        if isinstance(sentinels, Mapping):
            sentinels = tuple(sentinels.items())
        sentinels = tuple((str(k), str(v)) for k, v in sentinels)
        object.__setattr__(self, "sentiment_sentinels", sentinels)

        md, td, sep, esc = self.morph_delim, self.tag_delim, self.entity_sep, self.escape_char
        if not md or not td:
            raise ValueError("delimiters must be non-empty")
        if md == td:
            raise ValueError("morph_delim and tag_delim must differ")
        if any(c.isspace() for c in md + td):
            raise ValueError("morph_delim and tag_delim may not contain whitespace")
        if md.startswith(td) or td.startswith(md):
            raise ValueError("one delimiter may not be a prefix of the other")
        if any(c.isspace() and c != " " for c in sep) or not sep.strip():
            raise ValueError("entity_sep needs a non-space character and no whitespace besides ' '")
        if len(esc) != 1 or esc.isspace():
            raise ValueError("escape_char must be a single non-whitespace character")
        if esc in md + td + sep:
            raise ValueError("escape_char may not occur in a delimiter")
        labels = [k for k, _ in sentinels]
        values = [v for _, v in sentinels]
        if not values or len(set(values)) != len(values) or len(set(labels)) != len(labels):
            raise ValueError("sentiment sentinels must be pairwise distinct")
        if not all(values) or any(v != v.strip() for v in values):
            raise ValueError("sentinels must be non-empty and unpadded")
        if not self.empty_entities_token or not self.unk_label or not self.empty_answer_token:
            raise ValueError("empty_entities_token, unk_label and empty_answer_token must be non-empty")
        reserved = frozenset(md + td + sep.replace(" ", "") + esc)
        object.__setattr__(self, "reserved", reserved)
        if any(c in reserved or c.isspace() for c in self.unk_label):
            raise ValueError("unk_label may not contain reserved characters")

    @property
    def sentinels(self) -> dict[str, str]:
        return dict(self.sentiment_sentinels)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("reserved")
        d["sentiment_sentinels"] = dict(self.sentiment_sentinels)
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_mapping(cls, data: Mapping) -> "CodecConfig":
        data = dict(data)
        nested = {k.split(".", 1)[1]: data.pop(k) for k in list(data) if k.startswith("sentiment_sentinels.")}
        if nested:
            merged = dict(DEFAULT_SENTINELS)
            merged.update(nested)
            data["sentiment_sentinels"] = merged
        unknown = set(data) - {f for f in cls.__dataclass_fields__ if f != "reserved"}
        if unknown:
            raise ValueError(f"unknown codec config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "CodecConfig":
        """Read a JSON object or ``key=value`` lines.

        In ``key=value`` files keys and values are trimmed; a value that starts
        with a double quote is decoded as a JSON string, so delimiters with
        edge spaces (``entity_sep = " $$ "``) can be written explicitly.
        """
        text = Path(path).read_text(encoding="utf-8")
        if text.lstrip().startswith("{"):
            return cls.from_mapping(json.loads(text))
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            value = value.strip()
            if value.startswith('"'):
                value = json.loads(value)
            data[key.strip()] = value
        return cls.from_mapping(data)


class Note(NamedTuple):
    """A recoverable defect found by a lenient parse."""
    offset: int
    kind: str
    detail: str = ""


class ParseError(ValueError):
    def __init__(self, offset: int, kind: str, detail: str = ""):
        self.offset = offset
        self.kind = kind
        self.detail = detail
        msg = f"{kind} at offset {offset}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ParseResult(NamedTuple):
    value: object
    notes: list


# --- escaping ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _escape_table(cfg: CodecConfig) -> dict:
    return {ord(c): cfg.escape_char + c for c in cfg.reserved}


def escape(text: str, cfg: CodecConfig | None = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    return text.translate(_escape_table(cfg))


def unescape(text: str, cfg: CodecConfig | None = None) -> str:
    """Inverse of :func:`escape`; raises on a dangling or invalid escape."""
    cfg = cfg or DEFAULT_CONFIG
    esc = cfg.escape_char
    if esc not in text:
        return text
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == esc:
            if i + 1 == n:
                raise ParseError(i + 1, "dangling_escape")
            nxt = text[i + 1]
            if nxt not in cfg.reserved:
                raise ParseError(i + 1, "invalid_escape", repr(nxt))
            out.append(nxt)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


# --- tokenizer ----------------------------------------------------------------

_MORPH, _NER = "morph", "ner"


@lru_cache(maxsize=None)
def _token_re(cfg: CodecConfig, family: str) -> re.Pattern:
    cls = "".join(re.escape(c) for c in sorted(cfg.reserved))
    delims = [("md", cfg.morph_delim), ("td", cfg.tag_delim)] if family == _MORPH \
        else [("sep", cfg.entity_sep), ("td", cfg.tag_delim)]
    delims.sort(key=lambda kv: -len(kv[1]))
    parts = [
        ("esc", re.escape(cfg.escape_char) + f"[{cls}]"),
        ("badesc", re.escape(cfg.escape_char)),
        *[(name, re.escape(d)) for name, d in delims],
        ("space", " "),
        ("ws", r"\s"),
        ("stray", f"[{cls}]"),
        ("text", rf"[^{cls}\s]+"),
    ]
    return re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in parts))


class Token(NamedTuple):
    kind: str
    raw: str
    start: int

    @property
    def value(self) -> str:
        # escaped chars carry their literal; everything else is its raw text
        return self.raw[1] if self.kind == "esc" else self.raw


def tokenize(text: str, cfg: CodecConfig | None = None, family: str = _MORPH) -> list[Token]:
    """Split ``text`` into delimiter, whitespace, escape and content tokens."""
    cfg = cfg or DEFAULT_CONFIG
    return [Token(m.lastgroup, m.group(), m.start()) for m in _token_re(cfg, family).finditer(text)]


_STRICT_KINDS = {
    "stray": "stray_reserved",
    "ws": "whitespace",
    "td": "unexpected_delimiter",
    "md": "unexpected_delimiter",
    "sep": "unexpected_delimiter",
    "space": "unexpected_space",
}


def _strict_fail(tok: Token):
    if tok.kind == "badesc":
        raise ParseError(tok.start + 1, "invalid_escape")
    raise ParseError(tok.start, _STRICT_KINDS.get(tok.kind, tok.kind), repr(tok.raw))


# --- morpho-syntactic targets ---------------------------------------------------

def analysis_of(sentence: Sentence, mode: MorphMode) -> tuple:
    """Per-word analysis items of a gold sentence, in the shape the parser returns.

    SEG words are tuples of forms; TAG/LEMMA words are tuples of
    ``(form, tag)`` / ``(form, lemma)`` pairs.
    """
    mode = MorphMode(mode)
    if mode is MorphMode.SEG:
        return tuple(tuple(m.form for m in w.morphemes) for w in sentence.words)
    attr = "tag" if mode is MorphMode.TAG else "lemma"
    return tuple(tuple((m.form, getattr(m, attr)) for m in w.morphemes) for w in sentence.words)


def linearize_morph(sentence: Sentence, mode: MorphMode, cfg: CodecConfig | None = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    return linearize_analysis(analysis_of(sentence, mode), mode, cfg)


def linearize_analysis(analysis: Sequence, mode: MorphMode, cfg: CodecConfig | None = None) -> str:
    """Render an analysis in parser shape (see :func:`analysis_of`)."""
    cfg = cfg or DEFAULT_CONFIG
    table = _escape_table(cfg)
    md, td = cfg.morph_delim, cfg.tag_delim
    if MorphMode(mode) is MorphMode.SEG:
        return " ".join(md.join(f.translate(table) for f in word) for word in analysis)
    return " ".join(
        md.join(f.translate(table) + td + lab.translate(table) for f, lab in word)
        for word in analysis
    )


def _parse_morph_strict(text: str, mode: MorphMode, cfg: CodecConfig) -> tuple:
    tagged = mode is not MorphMode.SEG
    words: list[tuple] = []
    word: list = []
    cur: list[str] = []
    label: list[str] | None = None

    def close(offset: int):
        if not cur:
            raise ParseError(offset, "empty_segment")
        if not tagged:
            word.append("".join(cur))
            return
        if label is None:
            raise ParseError(offset, "missing_tag_delimiter")
        if not label:
            raise ParseError(offset, "empty_segment")
        word.append(("".join(cur), "".join(label)))

    for tok in tokenize(text, cfg, _MORPH):
        kind = tok.kind
        if kind == "text" or kind == "esc":
            (cur if label is None else label).append(tok.value)
        elif kind == "md" or kind == "space":
            close(tok.start)
            cur, label = [], None
            if kind == "space":
                words.append(tuple(word))
                word = []
        elif kind == "td" and tagged and label is None:
            if not cur:
                raise ParseError(tok.start, "empty_segment")
            label = []
        else:
            _strict_fail(tok)
    close(len(text))
    words.append(tuple(word))
    return tuple(words)


def _parse_morph_lenient(text: str, mode: MorphMode, cfg: CodecConfig) -> ParseResult:
    tagged = mode is not MorphMode.SEG
    unk = cfg.unk_label
    notes: list[Note] = []
    words: list[tuple] = []
    word: list = []
    cur: list[str] = []
    label: list[str] | None = None
    after_md = False
    seg_start = 0

    def close_morph(offset: int, by_md: bool):
        form = "".join(cur)
        if label is None and not form:
            if by_md or after_md:
                kind = "empty_segment" if by_md and word else "dangling_delimiter"
                notes.append(Note(offset, kind))
            return
        if not form:
            notes.append(Note(seg_start, "empty_form", "morpheme dropped"))
            return
        if not tagged:
            word.append(form)
        elif label is None:
            notes.append(Note(offset, "missing_tag_delimiter", f"{form!r} tagged {unk}"))
            word.append((form, unk))
        elif not label:
            notes.append(Note(offset, "empty_tag", f"{form!r} tagged {unk}"))
            word.append((form, unk))
        else:
            word.append((form, "".join(label)))

    def close_word(offset: int):
        nonlocal word
        if word:
            words.append(tuple(word))
        elif not after_md:
            notes.append(Note(offset, "extra_whitespace"))
        word = []

    for tok in tokenize(text, cfg, _MORPH):
        kind = tok.kind
        target = cur if label is None else label
        if kind == "text" or kind == "esc":
            target.append(tok.value)
        elif kind == "md":
            close_morph(tok.start, True)
            cur, label = [], None
            after_md = True
            seg_start = tok.start + len(tok.raw)
            continue
        elif kind == "space" or kind == "ws":
            if kind == "ws":
                notes.append(Note(tok.start, "whitespace", repr(tok.raw)))
            close_morph(tok.start, False)
            close_word(tok.start)
            cur, label = [], None
            seg_start = tok.start + 1
        elif kind == "td" and tagged and label is None:
            label = []
        else:
            notes.append(Note(tok.start, "literal_" + kind, repr(tok.raw)))
            target.append(tok.raw)
        after_md = False
    close_morph(len(text), False)
    if word:
        words.append(tuple(word))
    elif text and text[-1].isspace():
        notes.append(Note(len(text), "extra_whitespace"))
    if not words:
        notes.append(Note(0, "empty_output"))
    return ParseResult(tuple(words), notes)


def parse_morph(text: str, mode: MorphMode, cfg: CodecConfig | None = None,
                strict: bool = False) -> ParseResult:
    """Parse a SEG/TAG/LEMMA target string.

    Returns ``ParseResult(analysis, notes)`` where ``analysis`` has the shape
    produced by :func:`analysis_of`. Lenient recovery rules: empty segments
    and dangling delimiters are dropped, a morpheme without a tag delimiter
    (or with an empty tag) gets ``cfg.unk_label``, stray reserved characters
    and invalid escapes are kept literally, and whitespace runs act as a
    single word break.
    """
    cfg = cfg or DEFAULT_CONFIG
    mode = MorphMode(mode)
    if strict:
        return ParseResult(_parse_morph_strict(text, mode, cfg), [])
    return _parse_morph_lenient(text, mode, cfg)


# --- NER targets ----------------------------------------------------------------

def linearize_ner(entities: Iterable[Entity], cfg: CodecConfig | None = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    table = _escape_table(cfg)
    rendered = [e.surface.translate(table) + cfg.tag_delim + e.etype.translate(table) for e in entities]
    return cfg.entity_sep.join(rendered) if rendered else cfg.empty_entities_token


def _parse_ner_strict(text: str, cfg: CodecConfig) -> list[Entity]:
    if text == cfg.empty_entities_token:
        return []
    if not text:
        raise ParseError(0, "empty_input")
    entities: list[Entity] = []
    surface: list[str] = []
    seg = False
    etype: list[str] | None = None
    for tok in tokenize(text, cfg, _NER):
        kind = tok.kind
        if kind == "text" or kind == "esc":
            if etype is None:
                surface.append(tok.value)
                seg = True
            else:
                etype.append(tok.value)
        elif kind == "space" and etype is None:
            if not seg:
                raise ParseError(tok.start, "empty_segment")
            surface.append(" ")
            seg = False
        elif kind == "td" and etype is None:
            if not seg:
                raise ParseError(tok.start, "empty_segment")
            etype = []
        elif kind == "sep":
            if etype is None:
                raise ParseError(tok.start, "missing_tag_delimiter")
            if not etype:
                raise ParseError(tok.start, "empty_segment")
            entities.append(Entity("".join(surface), "".join(etype)))
            surface, seg, etype = [], False, None
        else:
            _strict_fail(tok)
    if etype is None:
        raise ParseError(len(text), "missing_tag_delimiter" if seg else "empty_segment")
    if not etype:
        raise ParseError(len(text), "empty_segment")
    entities.append(Entity("".join(surface), "".join(etype)))
    return entities


def _render_lenient(tokens: Sequence[Token], notes: list) -> str:
    out = []
    for tok in tokens:
        if tok.kind in ("text", "esc"):
            out.append(tok.value)
        elif tok.kind in ("space", "ws"):
            out.append(" ")
        else:
            notes.append(Note(tok.start, "literal_" + tok.kind, repr(tok.raw)))
            out.append(tok.raw)
    return "".join(out)


def _parse_ner_lenient(text: str, cfg: CodecConfig) -> ParseResult:
    notes: list[Note] = []
    stripped = text.strip()
    if stripped == cfg.empty_entities_token or not stripped:
        if text != cfg.empty_entities_token:
            notes.append(Note(0, "empty_output" if not stripped else "extra_whitespace"))
        return ParseResult([], notes)
    chunks: list[list[Token]] = [[]]
    for tok in tokenize(text, cfg, _NER):
        if tok.kind == "sep":
            chunks.append([])
        else:
            chunks[-1].append(tok)
    entities = []
    for chunk in chunks:
        start = chunk[0].start if chunk else 0
        tds = [i for i, tok in enumerate(chunk) if tok.kind == "td"]
        if not tds:
            notes.append(Note(start, "missing_tag_delimiter", "chunk dropped"))
            continue
        cut = tds[-1]
        raw_surface = _render_lenient(chunk[:cut], notes)
        raw_type = _render_lenient(chunk[cut + 1:], notes)
        surface = canonical_surface(raw_surface)
        etype_parts = raw_type.split()
        if not surface or not etype_parts:
            notes.append(Note(start, "empty_segment", "chunk dropped"))
            continue
        if surface != raw_surface or raw_type != etype_parts[0]:
            notes.append(Note(start, "extra_whitespace"))
        entities.append(Entity(surface, etype_parts[0]))
    return ParseResult(entities, notes)


def parse_ner(text: str, cfg: CodecConfig | None = None, strict: bool = False) -> ParseResult:
    """Parse an entity-list target. Lenient chunks lacking a tag delimiter are
    dropped with a note; the tag is split off at the *last* delimiter."""
    cfg = cfg or DEFAULT_CONFIG
    if strict:
        return ParseResult(_parse_ner_strict(text, cfg), [])
    return _parse_ner_lenient(text, cfg)


# --- QA and sentiment -------------------------------------------------------------

def linearize_qa(example: QAExample, cfg: CodecConfig | None = None) -> PairRecord:
    cfg = cfg or DEFAULT_CONFIG
    return PairRecord(example.id, example.context + cfg.qa_joiner + example.question,
                      example.answers[0], Task.QA)


def parse_qa(text: str, cfg: CodecConfig | None = None, strict: bool = False) -> ParseResult:
    if strict:
        if not text or text[0].isspace():
            raise ParseError(0, "empty_input" if not text else "extra_whitespace")
        if text[-1].isspace():
            raise ParseError(len(text), "extra_whitespace")
        return ParseResult(text, [])
    stripped = text.strip()
    notes = [] if stripped == text else [Note(0, "extra_whitespace")]
    return ParseResult(stripped, notes)


def linearize_sentiment(example: SentimentExample, cfg: CodecConfig | None = None) -> PairRecord:
    cfg = cfg or DEFAULT_CONFIG
    return PairRecord(example.id, example.text, cfg.sentinels[example.label], Task.SENTIMENT)


def parse_sentiment(text: str, cfg: CodecConfig | None = None, strict: bool = False) -> ParseResult:
    """Map a sentinel back to its label. Lenient mode trims padding and returns
    ``None`` (abstain) for anything unrecognised."""
    cfg = cfg or DEFAULT_CONFIG
    inverse = {v: k for k, v in cfg.sentiment_sentinels}
    if strict:
        if text in inverse:
            return ParseResult(inverse[text], [])
        best = max(_common_prefix(text, s) for s in inverse)
        raise ParseError(best if best < len(text) else len(text), "unknown_sentinel", repr(text))
    key = text.strip()
    if key in inverse:
        notes = [] if key == text else [Note(0, "extra_whitespace")]
        return ParseResult(inverse[key], notes)
    return ParseResult(None, [Note(0, "unknown_sentinel", repr(text))])


def _common_prefix(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def parse_output(text: str, task: Task, cfg: CodecConfig | None = None, strict: bool = False) -> ParseResult:
    """Dispatch to the parser for ``task``."""
    task = Task(task)
    if task.morph_mode is not None:
        return parse_morph(text, task.morph_mode, cfg, strict)
    if task is Task.NER:
        return parse_ner(text, cfg, strict)
    if task is Task.QA:
        return parse_qa(text, cfg, strict)
    return parse_sentiment(text, cfg, strict)


DEFAULT_CONFIG = CodecConfig()


class MorphLinearizer(TransformerMixin, BaseEstimator):
    """Transformer wrapper: sentences -> target strings and back.

    ``transform`` linearizes sentences; ``inverse_transform`` parses target
    strings into analyses (lenient unless ``strict``).
    """

    def __init__(self, mode="SEG", config=None, strict=False):
        self.mode = mode
        self.config = config
        self.strict = strict

    def fit(self, X=None, y=None):
        self.mode_ = MorphMode(self.mode)
        self.config_ = self.config if self.config is not None else DEFAULT_CONFIG
        return self

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        from .validation import check_sentences

        check_is_fitted(self)
        return [linearize_morph(s, self.mode_, self.config_) for s in check_sentences(X)]

    def inverse_transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self)
        return [parse_morph(t, self.mode_, self.config_, self.strict).value for t in X]
