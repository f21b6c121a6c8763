"""Input checking helpers used by the estimator classes."""
from __future__ import annotations

from typing import Iterable

from .core import Corpus, MorphMode, Sentence, Task, TagSet, validate_sentence


def check_mode(mode) -> MorphMode:
    try:
        if isinstance(mode, (MorphMode, Task)):
            return MorphMode(mode.value)
        return MorphMode(str(mode).upper())
    except ValueError:
        raise ValueError(f"mode must be one of SEG, TAG, LEMMA; got {mode!r}") from None


def check_task(task) -> Task:
    if isinstance(task, Task):
        return task
    if isinstance(task, MorphMode):
        return Task(task.value)
    try:
        return Task.from_cli(str(task))
    except ValueError:
        raise ValueError(f"unknown task {task!r}") from None


def check_sentences(X, *, tagset: TagSet | None = None, validate: bool = False) -> list[Sentence]:
    """Coerce ``X`` to a list of sentences, optionally validating each one."""
    if isinstance(X, Sentence):
        raise TypeError("expected an iterable of Sentence, got a single Sentence")
    sentences = list(X.sentences if isinstance(X, Corpus) else X)
    for i, s in enumerate(sentences):
        if not isinstance(s, Sentence):
            raise TypeError(f"element {i} is {type(s).__name__}, expected Sentence")
        if validate:
            problems = validate_sentence(s, tagset)
            if problems:
                raise ValueError(f"sentence {s.id!r}: " + "; ".join(map(str, problems)))
    return sentences


def check_texts(X) -> list[str]:
    """Accept raw strings or sentences (whose surface text is used)."""
    if isinstance(X, (str, Sentence)):
        raise TypeError("expected an iterable of texts")
    out = []
    for item in X.sentences if isinstance(X, Corpus) else X:
        out.append(item.text if isinstance(item, Sentence) else str(item))
    return out


def check_consistent_length(*arrays: Iterable) -> None:
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"inconsistent lengths: {sorted(lengths)}")


def check_rate(name: str, value) -> float:
    rate = float(value)
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate for {name!r} must be in [0, 1], got {value!r}")
    return rate
