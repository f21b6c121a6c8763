"""Prediction sources that need no neural model.

* :func:`gold_oracle` renders the gold analysis exactly.
* :class:`NoisyChannel` / :func:`corrupt` damage the gold target string with
  seeded, per-site corruption operators.
* :class:`MostFrequentAnalysis` is a lexicon baseline trained on a corpus.

Random streams are keyed by ``(seed, example id, operator)`` so an example's
corruption does not depend on where it sits in the corpus, and raising one
operator's rate only ever adds sites to the set it fires on.
"""
from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from . import codec
from .codec import DEFAULT_CONFIG, CodecConfig, Token
from .core import (
    Corpus,
    Entity,
    Morpheme,
    MorphMode,
    NerRecord,
    Sentence,
    Task,
    TagSet,
    Word,
    validate_sentence,
)
from .validation import check_mode, check_rate, check_sentences, check_task, check_texts

OPERATORS = (
    "hallucinate_entity",
    "wrong_span",
    "swap_tag",
    "drop_tag_delim",
    "drop_morph_delim",
    "truncate_suffix",
    "empty_output",
)

TASK_OPERATORS = {
    Task.SEG: {"drop_morph_delim", "truncate_suffix", "empty_output"},
    Task.TAG: {"drop_morph_delim", "drop_tag_delim", "swap_tag", "truncate_suffix", "empty_output"},
    Task.LEMMA: {"drop_morph_delim", "drop_tag_delim", "truncate_suffix", "empty_output"},
    Task.NER: {"drop_tag_delim", "swap_tag", "truncate_suffix", "hallucinate_entity", "empty_output"},
    Task.QA: {"wrong_span", "hallucinate_entity", "truncate_suffix", "empty_output"},
    Task.SENTIMENT: {"swap_tag", "empty_output"},
}


class CorruptionConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorruptionConfig:
    seed: int = 0
    rates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        rates = {}
        for name, value in dict(self.rates).items():
            if name not in OPERATORS:
                raise CorruptionConfigError(f"unknown corruption operator {name!r}")
            try:
                rates[name] = check_rate(name, value)
            except (TypeError, ValueError) as exc:
                raise CorruptionConfigError(str(exc)) from None
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "seed", int(self.seed))

    def rate(self, op: str) -> float:
        return self.rates.get(op, 0.0)

    def check_task(self, task: Task) -> None:
        bad = sorted(op for op, r in self.rates.items() if r > 0 and op not in TASK_OPERATORS[task])
        if bad:
            raise CorruptionConfigError(f"operator(s) {bad} do not apply to task {task.value}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "CorruptionConfig":
        unknown = set(data) - {"seed", "rates"}
        if unknown:
            raise CorruptionConfigError(f"unknown corruption config keys: {sorted(unknown)}")
        return cls(data.get("seed", 0), data.get("rates", {}))

    @classmethod
    def from_file(cls, path: str | Path) -> "CorruptionConfig":
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))


def _rng(seed: int, example_id: str, op: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}\x1f{example_id}\x1f{op}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def gold_oracle(task, gold, cfg: CodecConfig | None = None) -> str:
    """The exact codec linearization of a gold object."""
    cfg = cfg or DEFAULT_CONFIG
    task = check_task(task)
    if task.morph_mode is not None:
        return codec.linearize_morph(gold, task.morph_mode, cfg)
    if task is Task.NER:
        entities = gold.entities if isinstance(gold, NerRecord) else gold
        return codec.linearize_ner(entities, cfg)
    if task is Task.QA:
        return gold.answers[0]
    return cfg.sentinels[gold.label]


# --- corruption operators -------------------------------------------------------------

def _fabricate(rng: random.Random, avoid: str) -> str:
    letters = "bcdfghjklmnpqrstvwxz"
    while True:
        word = "".join(rng.choice(letters) for _ in range(rng.randint(5, 8)))
        if word not in avoid:
            return word


def _join(tokens: Sequence[Token]) -> str:
    return "".join(t.raw for t in tokens)


def _drop_kind(tokens: list[Token], kind: str, rate: float, rng: random.Random) -> list[Token]:
    out = []
    for tok in tokens:
        # one draw per site, whatever the rate, keeps sites nested across rates
        if tok.kind == kind and rng.random() < rate:
            continue
        out.append(tok)
    return out


def _label_spans(tokens: Sequence[Token], stop: set[str]) -> list[tuple[int, int]]:
    """Index ranges of the label that follows each tag delimiter."""
    spans = []
    i = 0
    while i < len(tokens):
        if tokens[i].kind == "td":
            j = i + 1
            while j < len(tokens) and tokens[j].kind not in stop:
                j += 1
            spans.append((i + 1, j))
            i = j
        else:
            i += 1
    return spans


def _swap_labels(tokens: list[Token], stop: set[str], labels: Sequence[str], rate: float,
                 rng: random.Random, cfg: CodecConfig) -> list[Token]:
    out = list(tokens)
    replacements = {}
    for start, end in _label_spans(tokens, stop):
        current = "".join(t.value for t in tokens[start:end])
        if rng.random() < rate:
            choices = [lab for lab in labels if lab != current]
            if choices:
                replacements[(start, end)] = rng.choice(choices)
    for (start, end), new in sorted(replacements.items(), reverse=True):
        out[start:end] = [Token("text", codec.escape(new, cfg), -1)]
    return out


def _split_on(tokens: Sequence[Token], kind: str) -> list[list[Token]]:
    parts: list[list[Token]] = [[]]
    for tok in tokens:
        if tok.kind == kind:
            parts.append([])
        else:
            parts[-1].append(tok)
    return parts


def _truncate(parts: list, rate: float, rng: random.Random) -> list:
    if rng.random() < rate and len(parts) > 1:
        k = rng.randint(1, len(parts) - 1)
        return parts[:-k]
    return parts


class NoisyChannel(TransformerMixin, BaseEstimator):
    """Seeded surface-level corruption of gold target strings.

    ``rates`` maps operator names to per-site probabilities. Operators that
    do not apply to ``task`` raise :class:`CorruptionConfigError` when the
    channel is built.
    """

    def __init__(self, task="SEG", rates=None, seed=0, config=None, tagset=None, entity_tagset=None):
        self.task = task
        self.rates = rates
        self.seed = seed
        self.config = config
        self.tagset = tagset
        self.entity_tagset = entity_tagset
        self._check()

    def _check(self):
        task = check_task(self.task)
        corruption = CorruptionConfig(self.seed, self.rates or {})
        corruption.check_task(task)
        return task, corruption

    def fit(self, X=None, y=None):
        self.task_, self.corruption_ = self._check()
        return self

    def transform(self, X) -> list[str]:
        task, corruption = self._check()
        return [corrupt(g, task, corruption, self.config, tagset=self.tagset,
                        entity_tagset=self.entity_tagset) for g in X]


def corrupt(gold, task, corruption: CorruptionConfig, cfg: CodecConfig | None = None, *,
            tagset: TagSet | None = None, entity_tagset: TagSet | None = None) -> str:
    """Corrupt the gold linearization of one example.

    With every rate at zero the result equals :func:`gold_oracle` exactly.
    """
    cfg = cfg or DEFAULT_CONFIG
    task = check_task(task)
    corruption.check_task(task)
    text = gold_oracle(task, gold, cfg)
    rates = corruption.rates
    if not any(rates.values()):
        return text
    eid = str(gold.id)

    def stream(op):
        return _rng(corruption.seed, eid, op)

    rate = corruption.rate
    if task.morph_mode is not None:
        tokens = codec.tokenize(text, cfg, "morph")
        if task is Task.TAG:
            tags = list(tagset or TagSet.universal())
            tokens = _swap_labels(tokens, {"md", "space"}, tags, rate("swap_tag"), stream("swap_tag"), cfg)
        tokens = _drop_kind(tokens, "td", rate("drop_tag_delim"), stream("drop_tag_delim"))
        tokens = _drop_kind(tokens, "md", rate("drop_morph_delim"), stream("drop_morph_delim"))
        words = _truncate(_split_on(tokens, "space"), rate("truncate_suffix"), stream("truncate_suffix"))
        text = " ".join(_join(w) for w in words)
    elif task is Task.NER:
        entities = list(gold.entities if isinstance(gold, NerRecord) else gold)
        raw = gold.text if isinstance(gold, NerRecord) else ""
        r = stream("hallucinate_entity")
        if r.random() < rate("hallucinate_entity"):
            types = list(entity_tagset or TagSet.entities())
            avoid = raw + " " + " ".join(e.surface for e in entities)
            entities.append(Entity(_fabricate(r, avoid), r.choice(types)))
        if entities:
            tokens = codec.tokenize(codec.linearize_ner(entities, cfg), cfg, "ner")
            types = list(entity_tagset or TagSet.entities())
            tokens = _swap_labels(tokens, {"sep"}, types, rate("swap_tag"), stream("swap_tag"), cfg)
            tokens = _drop_kind(tokens, "td", rate("drop_tag_delim"), stream("drop_tag_delim"))
            chunks = _truncate(_split_on(tokens, "sep"), rate("truncate_suffix"), stream("truncate_suffix"))
            text = cfg.entity_sep.join(_join(c) for c in chunks)
    elif task is Task.QA:
        answer_tokens = text.split()
        context_tokens = gold.context.split()
        r = stream("hallucinate_entity")
        if r.random() < rate("hallucinate_entity"):
            answer_tokens = [_fabricate(r, gold.context) for _ in range(max(1, len(answer_tokens)))]
        r = stream("wrong_span")
        if r.random() < rate("wrong_span"):
            answer_tokens = _wrong_span(r, context_tokens, answer_tokens)
        answer_tokens = _truncate(answer_tokens, rate("truncate_suffix"), stream("truncate_suffix"))
        text = " ".join(answer_tokens)
    else:
        r = stream("swap_tag")
        if r.random() < rate("swap_tag"):
            others = [s for _, s in cfg.sentiment_sentinels if s != text]
            text = r.choice(others)
    if stream("empty_output").random() < rate("empty_output"):
        text = ""
    return text


def _wrong_span(rng: random.Random, context: list[str], answer: list[str]) -> list[str]:
    """A different contiguous context span, same length as the answer when possible."""
    width = max(1, len(answer))
    for size in (width, *range(1, len(context) + 1)):
        spans = [context[i:i + size] for i in range(len(context) - size + 1)]
        spans = [s for s in spans if s != answer]
        if spans:
            return rng.choice(spans)
    return answer


# --- most-frequent-analysis baseline --------------------------------------------------

Analysis = tuple  # tuple of (form, tag, lemma) triples


@dataclass
class MFALexicon:
    entries: dict[str, Analysis]
    counts: dict[str, Counter]
    fallback_tag: str = "NOUN"

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, surface: str) -> bool:
        return surface in self.entries

    def analyze(self, surface: str) -> Analysis:
        return self.entries.get(surface) or ((surface, self.fallback_tag, surface),)


def mfa_train(train: Iterable[Sentence], tagset: TagSet | None = None, fallback_tag: str = "NOUN") -> MFALexicon:
    """Most frequent full analysis per surface; ties go to the first seen."""
    tagset = tagset or TagSet.universal()
    if fallback_tag not in tagset:
        raise ValueError(f"fallback tag {fallback_tag!r} is not in tagset {tagset.name!r}")
    counts: dict[str, Counter] = {}
    n = 0
    for sentence in train:
        n += 1
        problems = validate_sentence(sentence, tagset)
        if problems:
            raise ValueError(f"sentence {sentence.id!r}: " + "; ".join(map(str, problems)))
        for word in sentence.words:
            key = tuple((m.form, m.tag, m.lemma) for m in word.morphemes)
            counts.setdefault(word.surface, Counter())[key] += 1
    if n == 0:
        raise ValueError("cannot train on an empty corpus")
    # max() keeps the first maximal item and Counter keeps insertion order
    entries = {surface: max(c.items(), key=lambda kv: kv[1])[0] for surface, c in counts.items()}
    return MFALexicon(entries, counts, fallback_tag)


def _project(analysis: Analysis, mode: MorphMode) -> tuple:
    if mode is MorphMode.SEG:
        return tuple(f for f, _, _ in analysis)
    if mode is MorphMode.TAG:
        return tuple((f, t) for f, t, _ in analysis)
    return tuple((f, lem) for f, _, lem in analysis)


def mfa_analysis(lex: MFALexicon, text: str, mode) -> tuple:
    """Per-word analysis (parser shape) the lexicon assigns to ``text``."""
    mode = check_mode(mode)
    return tuple(_project(lex.analyze(w), mode) for w in text.split())


def mfa_predict(lex: MFALexicon, text: str, mode, cfg: CodecConfig | None = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    mode = check_mode(mode)
    analysis = mfa_analysis(lex, text, mode)
    if not analysis:
        from .grammar import default_target

        return default_target(Task(mode.value), cfg)
    return codec.linearize_analysis(analysis, mode, cfg)


class MostFrequentAnalysis(BaseEstimator):
    """Lexicon baseline with the estimator interface.

    ``fit`` takes gold sentences, ``predict`` takes raw texts (or sentences,
    whose surface text is used) and returns target strings, ``score`` returns
    the aligned multiset F1 against gold sentences.
    """

    def __init__(self, mode="TAG", fallback_tag="NOUN", config=None, tagset=None):
        self.mode = mode
        self.fallback_tag = fallback_tag
        self.config = config
        self.tagset = tagset

    def fit(self, X, y=None):
        sentences = check_sentences(X)
        self.mode_ = check_mode(self.mode)
        self.lexicon_ = mfa_train(sentences, self.tagset, self.fallback_tag)
        return self

    def predict(self, X) -> list[str]:
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self)
        return [mfa_predict(self.lexicon_, t, self.mode_, self.config) for t in check_texts(X)]

    def score(self, X, y=None) -> float:
        from sklearn.utils.validation import check_is_fitted

        from .metrics import mset_scores

        check_is_fitted(self)
        sentences = check_sentences(X)
        preds = {s.id: mfa_analysis(self.lexicon_, s.text, self.mode_) for s in sentences}
        return mset_scores(sentences, preds, self.mode_).f1


# --- synthetic corpora ------------------------------------------------------------------

_SYLLABLES = ("ba", "be", "ha", "la", "va", "yit", "ke", "mi", "sh", "ta", "ro", "ne", "do", "gal")


def random_token(rng: random.Random, *, reserved_rate: float = 0.0) -> str:
    parts = [rng.choice(_SYLLABLES) for _ in range(rng.randint(1, 3))]
    if reserved_rate and rng.random() < reserved_rate:
        parts.insert(rng.randint(0, len(parts)), rng.choice(("@@", ">>", "@", ">", "$$", "\\", "$")))
    return "".join(parts)


def random_sentence(rng: random.Random, sid: str, tagset: TagSet | None = None, *,
                    max_words: int = 6, max_morphemes: int = 5, reserved_rate: float = 0.0) -> Sentence:
    """A structurally valid random sentence; surfaces are unrelated to forms."""
    tags = list(tagset or TagSet.universal())
    words = []
    for _ in range(rng.randint(1, max_words)):
        morphs = tuple(
            Morpheme(random_token(rng, reserved_rate=reserved_rate), rng.choice(tags),
                     random_token(rng, reserved_rate=reserved_rate))
            for _ in range(rng.randint(1, max_morphemes))
        )
        words.append(Word(random_token(rng, reserved_rate=reserved_rate), morphs))
    return Sentence(sid, tuple(words))


def synthetic_corpus(n: int, seed: int = 0, tagset: TagSet | None = None, **kw) -> Corpus:
    rng = random.Random(seed)
    return Corpus(tuple(random_sentence(rng, f"s{i}", tagset, **kw) for i in range(n)))


def ambiguous_corpus(n: int, seed: int = 0, *, vocab: int = 40, ambiguity: float = 0.3,
                     max_words: int = 8, tagset: TagSet | None = None) -> Corpus:
    """Sentences over a fixed vocabulary where a fraction ``ambiguity`` of the
    surfaces has two competing analyses (a majority and a minority one)."""
    rng = random.Random(seed)
    tags = list(tagset or TagSet.universal())

    def analysis():
        return tuple(Morpheme(random_token(rng), rng.choice(tags), random_token(rng))
                     for _ in range(rng.randint(1, 3)))

    lexicon = []
    for i in range(vocab):
        surface = f"w{i}" + random_token(rng)
        options = [analysis()]
        if rng.random() < ambiguity:
            options.append(analysis())
        lexicon.append((surface, options))
    sentences = []
    for k in range(n):
        words = []
        for _ in range(rng.randint(1, max_words)):
            surface, options = rng.choice(lexicon)
            pick = options[0] if len(options) == 1 or rng.random() < 0.7 else options[1]
            words.append(Word(surface, pick))
        sentences.append(Sentence(f"a{k}", tuple(words)))
    return Corpus(tuple(sentences))
