"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data or parse error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from io import StringIO
from pathlib import Path

from . import __version__, codec, grammar, ingest, metrics, simulate
from .codec import CodecConfig, ParseError
from .core import PairRecord, Task, TagSet

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

TASK_CHOICES = ("seg", "pos", "lemma", "ner", "qa", "sentiment")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_in(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.open(encoding="utf-8")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _codec_config(args) -> CodecConfig:
    if not getattr(args, "config", None):
        return CodecConfig()
    try:
        return CodecConfig.from_file(args.config)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad codec config {args.config}: {exc}") from None


def _tagset(args) -> TagSet | None:
    if not getattr(args, "tagset", None):
        return None
    try:
        return TagSet.from_file(args.tagset)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"bad tagset {args.tagset}: {exc}") from None


def _write_out(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def load_gold(path: str, task: Task, ner_level: str = "token", ner_format: str = "jsonl") -> list:
    """Read gold data in the task's native format."""
    with _open_in(path) as fh:
        try:
            if task.morph_mode is not None:
                return list(ingest.read_conllu(fh))
            if task is Task.NER:
                if ner_format == "bio":
                    return ingest.read_ner_bio(fh, ner_level)
                return ingest.read_ner(fh, ner_level)
            if task is Task.QA:
                return ingest.read_qa(fh).examples
            return ingest.read_sentiment(fh)
        except ingest.DataFormatError as exc:
            raise DataError(f"{path}: {exc}") from None


def _manifest(args, inputs: list[str], cfg: CodecConfig) -> dict:
    return {
        "command": args.command,
        "arguments": {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)},
        "config_fingerprint": cfg.fingerprint(),
        "inputs": {p: _digest(p) for p in inputs},
        "version": __version__,
    }


def _pairs(gold: list, task: Task, cfg: CodecConfig) -> list:
    if task.morph_mode is not None:
        return [PairRecord(s.id, s.text, codec.linearize_morph(s, task.morph_mode, cfg), task) for s in gold]
    if task is Task.NER:
        return [PairRecord(r.id, r.text, codec.linearize_ner(r.entities, cfg), task) for r in gold]
    if task is Task.QA:
        return [codec.linearize_qa(ex, cfg) for ex in gold]
    return [codec.linearize_sentiment(ex, cfg) for ex in gold]


def score_predictions(gold: list, outputs: dict, task: Task, cfg: CodecConfig, *,
                      strict: bool = False, repair: bool = False, ner_level: str | None = None):
    """Parse raw prediction strings and score them against gold objects.

    Returns the :class:`~mrlcast.metrics.MetricReport`; raises
    :class:`~mrlcast.metrics.MissingPredictionsError` for uncovered ids and
    :class:`~mrlcast.codec.ParseError` (annotated with ``example_id``) in
    strict mode.
    """
    ids = [g.id for g in gold]
    missing = [i for i in ids if i not in outputs]
    if missing:
        raise metrics.MissingPredictionsError(missing)
    g = grammar.grammar_for(task, cfg)
    parsed = {}
    n_edits = n_notes = 0
    for i in ids:
        text = outputs[i]
        if repair:
            fixed = grammar.repair(g, text)
            n_edits += len(fixed.edits)
            text = fixed.text
        try:
            result = codec.parse_output(text, task, cfg, strict=strict)
        except ParseError as exc:
            exc.example_id = i
            raise
        n_notes += len(result.notes)
        parsed[i] = result.value
    if task.morph_mode is not None:
        report = metrics.mset_scores(gold, parsed, task.morph_mode)
    elif task is Task.NER:
        report = metrics.ner_scores(gold, parsed, level=ner_level)
    elif task is Task.QA:
        report = metrics.qa_scores(gold, parsed)
    else:
        report = metrics.classification_f1([ex.label for ex in gold], [parsed[i] for i in ids])
    report.config_fingerprint = cfg.fingerprint()
    report.details["parse_notes"] = n_notes
    report.details["strict"] = strict
    if repair:
        report.details["repair_edits"] = n_edits
    return report


def _summary(report) -> str:
    line = f"{report.task}: P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f}"
    if report.em is not None:
        line += f" EM={report.em:.4f}"
    if "accuracy" in report.details:
        line += f" acc={report.details['accuracy']:.4f}"
    return line + f" (examples={report.support['examples']})"


def _emit_report(report, args, inputs: list[str], cfg: CodecConfig) -> None:
    payload = report.to_dict()
    payload["manifest"] = _manifest(args, inputs, cfg)
    text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    _write_out(args.report, text)
    print(_summary(report), file=sys.stderr)


# --- commands -----------------------------------------------------------------------

def cmd_convert(args) -> int:
    task = Task.from_cli(args.task)
    cfg = _codec_config(args)
    gold = load_gold(args.input, task, args.ner_level, args.ner_format)
    records = _pairs(gold, task, cfg)
    buf = StringIO()
    n = ingest.write_pairs(records, buf)
    _write_out(args.output, buf.getvalue())
    print(f"wrote {n} {task.value} pair(s)", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    task = Task.from_cli(args.task)
    cfg = _codec_config(args)
    gold = load_gold(args.gold, task, args.ner_level, args.ner_format)
    with _open_in(args.predictions) as fh:
        try:
            outputs = ingest.read_predictions(fh)
        except ingest.DataFormatError as exc:
            raise DataError(f"{args.predictions}: {exc}") from None
    try:
        report = score_predictions(gold, outputs, task, cfg, strict=args.strict, repair=args.repair,
                                   ner_level=args.ner_level if task is Task.NER else None)
    except metrics.MissingPredictionsError as exc:
        raise DataError(str(exc)) from None
    except ParseError as exc:
        raise DataError(f"id {exc.example_id}: {exc}") from None
    _emit_report(report, args, [args.gold, args.predictions], cfg)
    return EXIT_OK


def _corruption(args) -> simulate.CorruptionConfig:
    data = {"seed": 0, "rates": {}}
    if args.corruption:
        try:
            data = json.loads(Path(args.corruption).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad corruption config {args.corruption}: {exc}") from None
        data.setdefault("rates", {})
    for item in args.rate or ():
        name, _, value = item.partition("=")
        try:
            data["rates"][name] = float(value)
        except ValueError:
            raise UsageError(f"bad --rate {item!r}, expected operator=probability") from None
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        return simulate.CorruptionConfig.from_mapping(data)
    except simulate.CorruptionConfigError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args) -> int:
    task = Task.from_cli(args.task)
    cfg = _codec_config(args)
    corruption = _corruption(args)
    try:
        corruption.check_task(task)
    except simulate.CorruptionConfigError as exc:
        raise UsageError(str(exc)) from None
    gold = load_gold(args.gold, task, args.ner_level, args.ner_format)
    tagset = _tagset(args)
    lines = []
    for g in gold:
        out = simulate.corrupt(g, task, corruption, cfg, tagset=tagset)
        lines.append(json.dumps({"id": g.id, "output": out}, ensure_ascii=False) + "\n")
    _write_out(args.output, "".join(lines))
    print(f"wrote {len(lines)} prediction(s), seed {corruption.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_baseline(args) -> int:
    task = Task.from_cli(args.task)
    if task.morph_mode is None:
        raise UsageError("baseline supports seg, pos and lemma only")
    cfg = _codec_config(args)
    tagset = _tagset(args)
    train = load_gold(args.train, task)
    test = load_gold(args.test, task)
    if not train:
        raise DataError(f"{args.train}: empty training corpus")
    try:
        lex = simulate.mfa_train(train, tagset, args.fallback_tag)
    except ValueError as exc:
        raise DataError(f"{args.train}: {exc}") from None
    outputs = {s.id: simulate.mfa_predict(lex, s.text, task.morph_mode, cfg) for s in test}
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            ingest.write_predictions(outputs, fh)
    report = score_predictions(test, outputs, task, cfg)
    report.details["lexicon_size"] = len(lex)
    _emit_report(report, args, [args.train, args.test], cfg)
    return EXIT_OK


def _read_prediction_file(path: str) -> dict:
    with _open_in(path) as fh:
        try:
            return ingest.read_predictions(fh)
        except ingest.DataFormatError as exc:
            raise DataError(f"{path}: {exc}") from None


def cmd_validate(args) -> int:
    task = Task.from_cli(args.task)
    cfg = _codec_config(args)
    g = grammar.grammar_for(task, cfg)
    outputs = _read_prediction_file(args.predictions)
    rejected = 0
    for pid, text in outputs.items():
        verdict = grammar.validate(g, text)
        if not verdict:
            rejected += 1
            expected = ", ".join(sorted(verdict.expected))
            print(f"{pid}\treject at offset {verdict.offset}; expected {{{expected}}}")
    print(f"{len(outputs) - rejected} accepted, {rejected} rejected", file=sys.stderr)
    return EXIT_DATA if rejected else EXIT_OK


def cmd_repair(args) -> int:
    task = Task.from_cli(args.task)
    cfg = _codec_config(args)
    g = grammar.grammar_for(task, cfg)
    outputs = _read_prediction_file(args.predictions)
    lines = []
    total = 0
    for pid, text in outputs.items():
        fixed = grammar.repair(g, text)
        total += len(fixed.edits)
        for e in fixed.edits:
            print(f"{pid}\t{e.rule}@{e.offset}\t{e.detail}", file=sys.stderr)
        lines.append(json.dumps({"id": pid, "output": fixed.text}, ensure_ascii=False) + "\n")
    _write_out(args.output, "".join(lines))
    print(f"repaired {len(lines)} prediction(s), {total} edit(s)", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrlcast", description="Text-to-text casting, parsing and scoring for MRL tasks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, ner=True):
        p.add_argument("--task", required=True, choices=TASK_CHOICES)
        p.add_argument("--config", metavar="PATH", help="codec config (JSON or key=value)")
        if ner:
            p.add_argument("--ner-level", choices=ingest.NER_LEVELS, default="token")
            p.add_argument("--ner-format", choices=("jsonl", "bio"), default="jsonl")

    p = sub.add_parser("convert", help="dataset -> text-to-text pairs JSONL")
    p.add_argument("input")
    common(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval", help="score a predictions JSONL against gold")
    p.add_argument("gold")
    p.add_argument("predictions")
    common(p)
    p.add_argument("--strict", action="store_true", help="fail on the first malformed prediction")
    p.add_argument("--repair", action="store_true", help="repair predictions before parsing")
    p.add_argument("--report", metavar="PATH")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="corrupt gold targets into a predictions JSONL")
    p.add_argument("gold")
    common(p)
    p.add_argument("--corruption", metavar="PATH", help="JSON {seed, rates}")
    p.add_argument("--rate", action="append", metavar="OP=P", help="override one operator rate")
    p.add_argument("--seed", type=int)
    p.add_argument("--tagset", metavar="PATH")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline", help="most-frequent-analysis baseline: train, predict, score")
    p.add_argument("train")
    p.add_argument("test")
    common(p, ner=False)
    p.add_argument("--fallback-tag", default="NOUN")
    p.add_argument("--tagset", metavar="PATH")
    p.add_argument("-o", "--output", help="write predictions JSONL here")
    p.add_argument("--report", metavar="PATH")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("validate", help="check predictions against the task grammar")
    p.add_argument("predictions")
    common(p, ner=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("repair", help="rewrite predictions into the task grammar")
    p.add_argument("predictions")
    common(p, ner=False)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_repair)
    return parser


def main(argv=None) -> int:
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(encoding="utf-8")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mrlcast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"mrlcast: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())
