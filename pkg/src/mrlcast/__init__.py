"""Text-to-text casting, parsing and scoring for morphologically rich language tasks."""

__version__ = "0.1.0"

from .codec import (
    DEFAULT_CONFIG,
    CodecConfig,
    MorphLinearizer,
    ParseError,
    ParseResult,
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
from .core import (
    Corpus,
    Entity,
    Morpheme,
    MorphMode,
    NerRecord,
    PairRecord,
    QAExample,
    Sentence,
    SentimentExample,
    TagSet,
    Task,
    Word,
    validate_corpus,
    validate_sentence,
)
from .grammar import GrammarRepairer, allowed_next, grammar_for, repair, validate
from .metrics import (
    MetricReport,
    classification_f1,
    error_reduction,
    mset_scores,
    ner_scores,
    qa_scores,
    score_delta,
)
from .simulate import CorruptionConfig, MostFrequentAnalysis, NoisyChannel, corrupt, gold_oracle

__all__ = [
    "DEFAULT_CONFIG", "CodecConfig", "Corpus", "CorruptionConfig", "Entity", "GrammarRepairer",
    "MetricReport", "MorphLinearizer", "MorphMode", "Morpheme", "MostFrequentAnalysis", "NerRecord",
    "NoisyChannel", "PairRecord", "ParseError", "ParseResult", "QAExample", "Sentence",
    "SentimentExample", "TagSet", "Task", "Word", "allowed_next", "classification_f1", "corrupt",
    "error_reduction", "escape", "gold_oracle", "grammar_for", "linearize_morph", "linearize_ner",
    "linearize_qa", "linearize_sentiment", "mset_scores", "ner_scores", "parse_morph", "parse_ner",
    "parse_output", "parse_qa", "parse_sentiment", "qa_scores", "repair", "score_delta", "unescape",
    "validate", "validate_corpus", "validate_sentence",
]
