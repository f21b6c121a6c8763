"""Domain types shared across the package, plus structural validation.

Everything here is an immutable value. Validation never raises: it returns
a list of :class:`Violation` records so callers decide what to do with them.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

UD_UPOS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
NER_TYPES = ("PER", "ORG", "LOC", "GPE", "FAC", "EVE", "WOA", "ANG", "DUC")
SENTIMENT_LABELS = ("positive", "negative", "neutral")

# Placeholder label for morphemes whose tag could not be recovered.
UNK = "UNK"


class MorphMode(str, enum.Enum):
    SEG = "SEG"
    TAG = "TAG"
    LEMMA = "LEMMA"


_MORPH_MODES = {m.value: m for m in MorphMode}


class Task(str, enum.Enum):
    SEG = "SEG"
    TAG = "TAG"
    LEMMA = "LEMMA"
    NER = "NER"
    QA = "QA"
    SENTIMENT = "SENTIMENT"

    @property
    def morph_mode(self) -> MorphMode | None:
        return _MORPH_MODES.get(self.value)

    @classmethod
    def from_cli(cls, name: str) -> "Task":
        """Map a CLI task name (``seg``, ``pos``, ...) onto a task."""
        key = name.strip().upper()
        if key == "POS":
            key = "TAG"
        return cls(key)


@dataclass(frozen=True)
class TagSet:
    name: str
    labels: tuple[str, ...]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError(f"tagset {self.name!r} has no labels")
        if len(set(labels)) != len(labels):
            raise ValueError(f"tagset {self.name!r} has duplicate labels")
        for label in labels:
            if not label or any(c.isspace() for c in label):
                raise ValueError(f"tagset {self.name!r}: bad label {label!r}")
            if label == UNK:
                raise ValueError(f"{UNK!r} is reserved and cannot be a tagset label")
        object.__setattr__(self, "_members", frozenset(labels))

    def __contains__(self, label: object) -> bool:
        return label in self._members

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def universal(cls) -> "TagSet":
        return cls("UD-UPOS", UD_UPOS)

    @classmethod
    def entities(cls) -> "TagSet":
        return cls("NER", NER_TYPES)

    @classmethod
    def from_file(cls, path: str | Path) -> "TagSet":
        """Load a tagset from JSON (``{"name":..., "labels": [...]}`` or a bare
        list) or from plain text with one label per line."""
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            data = json.loads(text)
            if isinstance(data, list):
                return cls(path.stem, tuple(data))
            return cls(data.get("name", path.stem), tuple(data["labels"]))
        labels = [line.strip() for line in text.splitlines() if line.strip()]
        return cls(path.stem, tuple(labels))


@dataclass(frozen=True)
class Morpheme:
    form: str
    tag: str
    lemma: str
    # Unused CoNLL-U columns (XPOS, FEATS, HEAD, DEPREL, DEPS, MISC); opaque.
    extra: tuple[str, ...] = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class Word:
    surface: str
    morphemes: tuple[Morpheme, ...]
    # Columns after FORM on a multiword-token range row; opaque.
    extra: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "morphemes", tuple(self.morphemes))


@dataclass(frozen=True)
class Sentence:
    id: str
    words: tuple[Word, ...]
    comments: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))

    @property
    def text(self) -> str:
        """Raw whitespace-joined surface text."""
        return " ".join(w.surface for w in self.words)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    def by_id(self) -> dict[str, Sentence]:
        return {s.id: s for s in self.sentences}


@dataclass(frozen=True)
class Entity:
    surface: str
    etype: str


@dataclass(frozen=True)
class NerRecord:
    id: str
    text: str
    entities: tuple[Entity, ...]
    level: str = "token"

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))


@dataclass(frozen=True)
class QAExample:
    id: str
    context: str
    question: str
    answers: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "answers", tuple(self.answers))


@dataclass(frozen=True)
class SentimentExample:
    id: str
    text: str
    label: str


@dataclass(frozen=True)
class PairRecord:
    """One serialized text-to-text example."""
    id: str
    input: str
    target: str
    task: Task


@dataclass(frozen=True)
class Violation:
    message: str
    word: int | None = None
    morpheme: int | None = None
    field: str | None = None

    def __str__(self) -> str:
        return self.message


def _bad_token(text: str) -> bool:
    return not text or any(c.isspace() for c in text)


def validate_sentence(sentence: Sentence, tagset: TagSet | None = None) -> list[Violation]:
    """Return every structural violation in ``sentence``; empty list means ok."""
    tagset = tagset or TagSet.universal()
    out: list[Violation] = []
    if not sentence.words:
        out.append(Violation("sentence has no words"))
    for wi, word in enumerate(sentence.words):
        if _bad_token(word.surface):
            out.append(Violation(f"empty or whitespace surface at word {wi}", wi, None, "surface"))
        if not word.morphemes:
            out.append(Violation(f"empty morphemes at word {wi}", wi, None, "morphemes"))
        for mi, m in enumerate(word.morphemes):
            for name in ("form", "tag", "lemma"):
                value = getattr(m, name)
                if _bad_token(value):
                    out.append(Violation(
                        f"empty or whitespace {name} at word {wi} morpheme {mi}", wi, mi, name))
            if m.tag and m.tag not in tagset:
                out.append(Violation(
                    f"unknown tag {m.tag!r} at word {wi} morpheme {mi}", wi, mi, "tag"))
    return out


def validate_corpus(corpus: Iterable[Sentence], tagset: TagSet | None = None) -> dict[str, list[Violation]]:
    """Validate every sentence; also flags duplicate sentence ids."""
    report: dict[str, list[Violation]] = {}
    seen: set[str] = set()
    for sentence in corpus:
        problems = validate_sentence(sentence, tagset)
        if sentence.id in seen:
            problems.append(Violation(f"duplicate sentence id {sentence.id!r}"))
        seen.add(sentence.id)
        if problems:
            report.setdefault(sentence.id, []).extend(problems)
    return report


def canonical_surface(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return " ".join(text.split())


def validate_entity(entity: Entity, tagset: TagSet | None = None) -> list[Violation]:
    tagset = tagset or TagSet.entities()
    out = []
    if not entity.surface or entity.surface != canonical_surface(entity.surface):
        out.append(Violation(f"entity surface {entity.surface!r} is empty or not whitespace-normalized",
                             field="surface"))
    if entity.etype not in tagset:
        out.append(Violation(f"unknown entity type {entity.etype!r}", field="etype"))
    return out


def validate_qa(example: QAExample) -> list[Violation]:
    # local import keeps core free of the metrics dependency at module load
    from .metrics import normalize_answer

    out = []
    if not example.question.strip():
        out.append(Violation("empty question", field="question"))
    if not example.answers:
        out.append(Violation("no answers", field="answers"))
    for i, answer in enumerate(example.answers):
        if not normalize_answer(answer):
            out.append(Violation(f"answer {i} is empty after normalization", field="answers"))
    return out


def sentence_from_analysis(sid: str, words: Sequence[tuple[str, Sequence[tuple[str, str, str]]]]) -> Sentence:
    """Build a sentence from ``[(surface, [(form, tag, lemma), ...]), ...]``."""
    return Sentence(sid, tuple(
        Word(surface, tuple(Morpheme(*m) for m in morphs)) for surface, morphs in words
    ))
