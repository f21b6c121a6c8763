"""Finite-state acceptors for well-formed target strings.

Each task's output language is written as a small regular expression over
*character classes* rather than raw characters: every delimiter character,
the escape character and every character of a literal token (sentinels, the
empty-entities token) gets its own class; all other characters fall into
``CONTENT``, ``SPACE`` (a plain blank) or ``WS`` (any other whitespace).
The expression is compiled with Thompson's construction and determinized by
subset construction, giving a dense table with an explicit reject entry for
every (state, class) pair without a move.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from sklearn.base import BaseEstimator, TransformerMixin

from . import codec
from .codec import DEFAULT_CONFIG, CodecConfig
from .core import MorphMode, Task

CONTENT = "CONTENT"
SPACE = "SPACE"
WS = "WS"
EOS = "EOS"
REJECT = -1


# --- regular expressions over classes -----------------------------------------

def _sym(*classes):
    return ("sym", frozenset(classes))


def _seq(*nodes):
    return ("seq", nodes)


def _alt(*nodes):
    return ("alt", nodes)


def _star(node):
    return ("star", node)


def _plus(node):
    return _seq(node, _star(node))


class _NFA:
    def __init__(self):
        self.moves: list[list[tuple[frozenset, int]]] = []
        self.eps: list[list[int]] = []

    def new(self) -> int:
        self.moves.append([])
        self.eps.append([])
        return len(self.moves) - 1

    def build(self, node) -> tuple[int, int]:
        kind = node[0]
        if kind == "sym":
            s, e = self.new(), self.new()
            self.moves[s].append((node[1], e))
            return s, e
        if kind == "seq":
            start, end = self.build(node[1][0])
            for child in node[1][1:]:
                s, e = self.build(child)
                self.eps[end].append(s)
                end = e
            return start, end
        if kind == "alt":
            s, e = self.new(), self.new()
            for child in node[1]:
                cs, ce = self.build(child)
                self.eps[s].append(cs)
                self.eps[ce].append(e)
            return s, e
        if kind == "star":
            s, e = self.new(), self.new()
            cs, ce = self.build(node[1])
            self.eps[s] += [cs, e]
            self.eps[ce] += [cs, e]
            return s, e
        raise ValueError(f"unknown node {kind!r}")

    def closure(self, states) -> frozenset:
        stack = list(states)
        seen = set(stack)
        while stack:
            for t in self.eps[stack.pop()]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)


def _determinize(node, alphabet: tuple[str, ...]):
    nfa = _NFA()
    start, final = nfa.build(node)
    first = nfa.closure([start])
    index = {first: 0}
    order = [first]
    table = []
    i = 0
    while i < len(order):
        current = order[i]
        row = []
        for cls in alphabet:
            targets = [t for s in current for label, t in nfa.moves[s] if cls in label]
            if not targets:
                row.append(REJECT)
                continue
            nxt = nfa.closure(targets)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        table.append(tuple(row))
        i += 1
    accepting = frozenset(k for k, st in enumerate(order) if final in st)
    return _minimize(table, accepting)


def _minimize(table, accepting):
    """Moore partition refinement; state 0 stays the start state."""
    n = len(table)
    block = [1 if s in accepting else 0 for s in range(n)]
    while True:
        sigs = [(block[s], tuple(block[t] if t != REJECT else REJECT for t in table[s]))
                for s in range(n)]
        ids: dict = {}
        for s in range(n):
            ids.setdefault(sigs[s], len(ids))
        refined = [ids[sigs[s]] for s in range(n)]
        if len(ids) == len(set(block)):
            break
        block = refined
    # renumber so that the start state's block is 0, in first-seen order
    order: dict = {}
    for s in range(n):
        order.setdefault(block[s], len(order))
    new_table = [None] * len(order)
    for s in range(n):
        b = order[block[s]]
        if new_table[b] is None:
            new_table[b] = tuple(order[block[t]] if t != REJECT else REJECT for t in table[s])
    return tuple(new_table), frozenset(order[block[s]] for s in accepting)


# --- grammars -------------------------------------------------------------------

class Verdict(NamedTuple):
    accepted: bool
    offset: int | None = None
    expected: frozenset = frozenset()

    def __bool__(self) -> bool:
        return self.accepted


class Edit(NamedTuple):
    rule: str
    offset: int
    detail: str = ""


class RepairResult(NamedTuple):
    text: str
    edits: list


class NotViablePrefix(ValueError):
    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"not a viable prefix, offset {offset}")


@dataclass(frozen=True)
class OutputGrammar:
    task: Task
    cfg: CodecConfig
    alphabet: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    accepting: frozenset
    special: dict

    @property
    def n_states(self) -> int:
        return len(self.table)

    def classify(self, char: str) -> str:
        return self.alphabet[self._class_index(char)]

    def _class_index(self, char: str) -> int:
        idx = self.special.get(char)
        if idx is not None:
            return idx
        if char == " ":
            return self._space
        if char.isspace():
            return self._ws
        return self._content

    def __post_init__(self):
        object.__setattr__(self, "_space", self.alphabet.index(SPACE))
        object.__setattr__(self, "_ws", self.alphabet.index(WS))
        object.__setattr__(self, "_content", self.alphabet.index(CONTENT))

    def run(self, text: str) -> tuple[int, int]:
        """Return ``(state, offset)``; ``state`` is REJECT if the automaton
        died at ``offset``, otherwise the state after the whole string."""
        table, special = self.table, self.special
        sp, ws, content = self._space, self._ws, self._content
        state = 0
        for i, c in enumerate(text):
            idx = special.get(c)
            if idx is None:
                idx = sp if c == " " else ws if c.isspace() else content
            nxt = table[state][idx]
            if nxt == REJECT:
                return REJECT, i
            state = nxt
        return state, len(text)

    def moves(self, state: int) -> frozenset:
        out = {self.alphabet[k] for k, t in enumerate(self.table[state]) if t != REJECT}
        if state in self.accepting:
            out.add(EOS)
        return frozenset(out)


def _build(task: Task, cfg: CodecConfig) -> OutputGrammar:
    reserved = cfg.reserved
    literal_chars: set[str] = set()
    if task is Task.NER:
        literal_chars |= set(cfg.empty_entities_token)
    if task is Task.SENTIMENT:
        for _, s in cfg.sentiment_sentinels:
            literal_chars |= set(s)
    specials = set(literal_chars)
    if task not in (Task.QA, Task.SENTIMENT):
        specials |= reserved
    specials.discard(" ")
    specials = sorted(c for c in specials if not c.isspace())
    alphabet = (CONTENT, SPACE, WS, *specials)

    def cls(c: str) -> str:
        if c == " ":
            return SPACE
        return c if c in specials else CONTENT

    def lit(s: str):
        return _seq(*[_sym(cls(c)) for c in s])

    content_like = [CONTENT, *[c for c in specials if c not in reserved]]
    unit = _alt(_sym(*content_like), _seq(_sym(cfg.escape_char), _sym(*sorted(reserved))))
    segment = _plus(unit)

    if task.morph_mode is MorphMode.SEG:
        word = _seq(segment, _star(_seq(lit(cfg.morph_delim), segment)))
        node = _seq(word, _star(_seq(_sym(SPACE), word)))
    elif task.morph_mode is not None:
        morph = _seq(segment, lit(cfg.tag_delim), segment)
        word = _seq(morph, _star(_seq(lit(cfg.morph_delim), morph)))
        node = _seq(word, _star(_seq(_sym(SPACE), word)))
    elif task is Task.NER:
        surface = _seq(segment, _star(_seq(_sym(SPACE), segment)))
        entity = _seq(surface, lit(cfg.tag_delim), segment)
        node = _alt(_seq(entity, _star(_seq(lit(cfg.entity_sep), entity))),
                    lit(cfg.empty_entities_token))
    elif task is Task.SENTIMENT:
        node = _alt(*[lit(s) for _, s in cfg.sentiment_sentinels])
    else:
        solid = _sym(*[c for c in alphabet if c not in (SPACE, WS)])
        node = _seq(solid, _star(_seq(_star(_sym(SPACE, WS)), solid)))

    table, accepting = _determinize(node, alphabet)
    special = {c: alphabet.index(c) for c in specials}
    return OutputGrammar(task, cfg, alphabet, table, accepting, special)


@lru_cache(maxsize=64)
def grammar_for(task, cfg: CodecConfig | None = None) -> OutputGrammar:
    """Compiled (and cached) grammar for a task under a codec config."""
    return _build(Task(task), cfg or DEFAULT_CONFIG)


def validate(g: OutputGrammar, text: str) -> Verdict:
    state, offset = g.run(text)
    if state == REJECT:
        # the state just before dying tells us what would have been legal
        prev, _ = g.run(text[:offset])
        return Verdict(False, offset, g.moves(prev))
    if state in g.accepting:
        return Verdict(True)
    return Verdict(False, offset, g.moves(state))


def allowed_next(g: OutputGrammar, prefix: str) -> frozenset:
    """Character classes (plus ``EOS``) that may follow ``prefix``."""
    state, offset = g.run(prefix)
    if state == REJECT:
        raise NotViablePrefix(offset)
    moves = g.moves(state)
    if not moves:
        raise NotViablePrefix(len(prefix))
    return moves


# --- repair ---------------------------------------------------------------------

RULES = (
    "collapse_delimiters",
    "strip_edges",
    "drop_empty_segment",
    "append_unk_tag",
    "escape_reserved",
    "normalize_whitespace",
    "drop_chunk",
    "default_target",
)

_NOTE_RULE = {
    "empty_segment": "collapse_delimiters",
    "dangling_delimiter": "strip_edges",
    "extra_whitespace": "strip_edges",
    "empty_form": "drop_empty_segment",
    "missing_tag_delimiter": "append_unk_tag",
    "empty_tag": "append_unk_tag",
    "whitespace": "normalize_whitespace",
    "empty_output": "default_target",
    "unknown_sentinel": "default_target",
}


def default_target(task: Task, cfg: CodecConfig | None = None) -> str:
    cfg = cfg or DEFAULT_CONFIG
    task = Task(task)
    if task is Task.SEG:
        return cfg.unk_label
    if task in (Task.TAG, Task.LEMMA):
        return cfg.unk_label + cfg.tag_delim + cfg.unk_label
    if task is Task.NER:
        return cfg.empty_entities_token
    if task is Task.QA:
        return cfg.empty_answer_token
    sentinels = cfg.sentinels
    return sentinels.get("neutral", cfg.sentiment_sentinels[-1][1])


def _note_rule(note: codec.Note, task: Task) -> str:
    if note.kind.startswith("literal_"):
        return "escape_reserved"
    if task is Task.NER and note.kind in ("missing_tag_delimiter", "empty_segment"):
        return "drop_chunk"
    return _NOTE_RULE.get(note.kind, "normalize_whitespace")


def repair(g: OutputGrammar, text: str) -> RepairResult:
    """Rewrite ``text`` into the grammar's language.

    Accepted strings come back unchanged with an empty edit log. Anything else
    is parsed leniently and re-rendered canonically, which collapses repeated
    delimiters, strips edge delimiters and spaces, drops empty segments, tags
    untagged morphemes with the UNK label and escapes stray reserved
    characters. Input with nothing recoverable becomes the task's default
    target. Edits are reported in that fixed rule order.
    """
    if validate(g, text):
        return RepairResult(text, [])
    task, cfg = g.task, g.cfg
    parsed = codec.parse_output(text, task, cfg, strict=False)
    value = parsed.value
    if task.morph_mode is not None:
        out = codec.linearize_analysis(value, task.morph_mode, cfg) if value else ""
    elif task is Task.NER:
        out = codec.linearize_ner(value, cfg)
    elif task is Task.QA:
        out = value
    else:
        out = cfg.sentinels[value] if value is not None else ""
    edits = [Edit(_note_rule(n, task), n.offset, n.kind) for n in parsed.notes]
    if not out or (task is Task.NER and not value):
        out = out or default_target(task, cfg)
        if not any(e.rule == "default_target" for e in edits):
            edits.append(Edit("default_target", 0, "nothing recoverable"))
    if not edits:
        edits.append(Edit("normalize_whitespace", 0, "rewrite"))
    edits.sort(key=lambda e: (RULES.index(e.rule), e.offset))
    assert validate(g, out), f"repair produced a rejected string: {out!r}"
    return RepairResult(out, edits)


class GrammarRepairer(TransformerMixin, BaseEstimator):
    """Stateless transformer applying :func:`repair` to each prediction string."""

    def __init__(self, task="SEG", config=None):
        self.task = task
        self.config = config

    def fit(self, X=None, y=None):
        from .validation import check_task

        self.grammar_ = grammar_for(check_task(self.task), self.config)
        return self

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self)
        return [repair(self.grammar_, t).text for t in X]
